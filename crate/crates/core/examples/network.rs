//! Pairwise (BH-controlled) and multivariate causality networks on an
//! out-star, with their summary metrics.

use tailgc::causality::TestMethod;
use tailgc::dgp::{simulate_vdar1, star_coupling, StarKind};
use tailgc::network::{build_multivariate_network, build_pairwise_network, jaccard, metrics};

fn main() -> tailgc::Result<()> {
    let params = star_coupling(6, StarKind::Out, 0)?.with_chi(0.1);
    let panel = simulate_vdar1(&params, 10_000, 9)?;

    let lr = build_pairwise_network(&panel, TestMethod::Lr, 0.05, 1)?;
    let hong = build_pairwise_network(&panel, TestMethod::Hong, 0.05, 5)?;
    let dec = build_multivariate_network(&panel)?;

    println!("true edges: {:?}", params.causal_edges());
    for g in [&lr, &hong, &dec] {
        let m = metrics(g);
        println!(
            "{:<11} {:>2} edges  density {:.3}  reciprocity {:.3}  triangles {:.3}",
            g.method,
            g.edges.len(),
            m.density,
            m.reciprocity,
            m.triangle_density
        );
    }
    println!("Jaccard(lr, decimation) = {:.3}", jaccard(&lr, &dec)?);
    Ok(())
}
