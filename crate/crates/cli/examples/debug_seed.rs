use pipesizer_cli::fixtures::load_network;
use pipesizer_core::cmaes::{CmaConfig, CmaesRun};
use pipesizer_core::cost::PenaltyConfig;
use pipesizer_core::objective::{NetworkObjective, Objective};

fn main() {
    let seed: u64 = std::env::args().nth(1).unwrap().parse().unwrap();
    let net = load_network("nytp", None).unwrap();
    let obj = NetworkObjective::continuous(&net, PenaltyConfig::for_network(&net));
    let cfg = CmaConfig::new(400, 200_000);
    let mut run = CmaesRun::new(&obj, &cfg, seed);
    for g in 0..15 {
        let s = run.step(&obj);
        let st = run.state();
        let (_, best) = run.best();
        println!(
            "gen {g}: best {:.4e} genbest {:.4e} sigma {:.4e} |ps| {:.3e} mean[0..3] {:.2} {:.2} {:.2} cov00 {:.3e}",
            best, s.generation_best, st.sigma, st.path_sigma.norm(),
            st.mean[0], st.mean[1], st.mean[2], st.cov[(0,0)]
        );
    }
}
