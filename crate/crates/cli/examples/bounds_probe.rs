use pipesizer_cli::fixtures::load_network;
use pipesizer_cli::parallel::ParallelObjective;
use pipesizer_core::cmaes::{run_cmaes, BoundsMode, CmaConfig};
use pipesizer_core::cost::PenaltyConfig;
use pipesizer_core::objective::NetworkObjective;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let netname = &args[1];
    let lambda: usize = args[2].parse().unwrap();
    let mode = match args[3].as_str() {
        "clamp" => BoundsMode::Clamp,
        _ => BoundsMode::PenaltyRank,
    };
    let seeds: u64 = args[4].parse().unwrap();
    let pf: f64 = args.get(5).map(|v| v.parse().unwrap()).unwrap_or(1e7);
    let net = load_network(netname, None).unwrap();
    for seed in 1..=seeds {
        let mut pen = PenaltyConfig::for_network(&net);
        pen.pressure_factor = pf;
        let obj = ParallelObjective::new(NetworkObjective::continuous(&net, pen));
        let cfg = CmaConfig { bounds: mode, ..CmaConfig::new(lambda, 200_000) };
        let (rec, _) = run_cmaes(&obj, &cfg, seed);
        let d: Vec<f64> =
            rec.best_design.iter().map(|v| (v / 0.0254 * 100.0).round() / 100.0).collect();
        println!(
            "{netname} l={lambda} {:?} pf={pf:.0e} seed {seed}: best {:.4}M evals {} p13 {:.1} p14 {:.1} p16 {:.1} p17 {:.1}",
            mode,
            rec.best_cost / 1e6,
            rec.evaluations,
            d[12], d[13], d[15], d[16]
        );
    }
}
