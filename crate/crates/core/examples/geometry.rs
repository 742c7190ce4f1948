//! Build an 8-ring, 32-phase constellation and compare its PAPR with 256-QAM.

use rapsk::constellation::{QamConstellation, RapskConstellation, RapskParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = RapskConstellation::new(RapskParams::new(8, 32, 0.6)?)?;
    let qam = QamConstellation::new(256)?;

    println!("points      {}", c.size());
    println!("spacing     {:.6}", c.spacing());
    println!("radii       {:.4?}", c.radii());
    println!("power       {:.12}", c.power());
    println!("papr        {:.5}", c.papr());
    println!("papr 256qam {:.5}", qam.papr());
    println!("ratio       {:.4}", c.papr() / qam.papr());

    let label = [1, 0, 1, 0, 0, 1, 1, 1];
    let x = c.label_to_point(&label)?;
    let idx = c.point_to_indices(x);
    println!("label {label:?} -> {x:.4} -> {idx:?}");
    Ok(())
}
