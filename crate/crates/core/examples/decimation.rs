use tailgc::causality::decimate_vdar1;
use tailgc::dgp::{simulate_vdar1, star_coupling, StarKind};

fn main() -> tailgc::Result<()> {
    let params = star_coupling(5, StarKind::Mixed, 2)?;
    let panel = simulate_vdar1(&params, 20_000, 3)?;
    let d = decimate_vdar1(&panel)?;

    println!("q        tilted");
    for (q, l) in &d.tilted_path {
        let mark = if *q == d.q_star { "  <- q*" } else { "" };
        println!("{q:.3}  {l:>10.3}{mark}");
    }

    println!("\nvalidated coupling (row copies column):");
    for row in &d.lambda_validated {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.2}")).collect();
        println!("  [{}]", cells.join(", "));
    }
    println!("true edges (source, target): {:?}", params.causal_edges());
    Ok(())
}
