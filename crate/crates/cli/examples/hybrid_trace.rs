use pipesizer_cli::fixtures::load_network;
use pipesizer_core::cmaes::{CmaConfig, CmaesRun, StagnationWindow};
use pipesizer_core::cost::{pipe_cost, PenaltyConfig};
use pipesizer_core::greedy::{downward_greedy_bounded, upward_greedy_bounded};
use pipesizer_core::network::{round_to_commercial, DesignVector};
use pipesizer_core::objective::{NetworkObjective, Objective};
use pipesizer_core::FEASIBLE_PV_EPS;
use std::collections::BTreeSet;

fn main() {
    let seed: u64 = std::env::args().nth(1).unwrap().parse().unwrap();
    let lambda = 1000usize;
    let budget = 200_000u64;
    let net = load_network("hanoi", None).unwrap();
    let obj = NetworkObjective::continuous(&net, PenaltyConfig::for_network(&net));
    let cfg = CmaConfig::new(lambda, budget);
    let mut run = CmaesRun::new(&obj, &cfg, seed);
    let mut window = StagnationWindow::new(obj.dim(), lambda, 1e-5);
    let mut seen: BTreeSet<Vec<u16>> = BTreeSet::new();
    let mut best_feas = f64::INFINITY;
    let phi = 1.2 * 6.081e6;
    let mut n_repairs = 0u64;
    let mut repair_evals = 0u64;
    loop {
        if obj.evaluations() + lambda as u64 > budget {
            break;
        }
        let summary = run.step(&obj);
        let gen = run.state().generation;
        let mut cands: Vec<(f64, DesignVector)> = Vec::new();
        for x in &summary.samples {
            let r = round_to_commercial(&DesignVector::continuous(x.clone()), &net.table).unwrap();
            let key: Vec<u16> =
                r.diameters.iter().map(|&d| net.table.index_of(d).unwrap() as u16).collect();
            if !seen.insert(key) {
                continue;
            }
            let c = pipe_cost(&net, &r).unwrap();
            cands.push((c, r));
        }
        cands.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut processed = 0;
        for (c, r) in cands {
            if c >= phi || c >= best_feas * 1.02 {
                continue;
            }
            let cb = obj.evaluate(&r.diameters);
            if cb.total >= phi { continue; }
            let (repaired, rc) = if cb.sum_pv <= FEASIBLE_PV_EPS {
                (r.clone(), cb.pipe_cost)
            } else {
                let e0 = obj.evaluations();
                match upward_greedy_bounded(&obj, &net.table, &r, Some(budget)) {
                    Ok(Some(out)) => {
                        let c = out.cost.pipe_cost;
                        n_repairs += 1;
                        repair_evals += obj.evaluations() - e0;
                        (out.design, c)
                    }
                    _ => continue,
                }
            };
            let trimmed = downward_greedy_bounded(&obj, &net.table, &repaired, Some(budget))
                .map(|o| o.cost.pipe_cost)
                .unwrap_or(rc);
            processed += 1;
            if trimmed < best_feas {
                println!(
                    "gen {gen} evals {}: cand {:.4}M -> repaired {:.4}M -> trimmed {:.4}M  **BEST**",
                    obj.evaluations(),
                    c / 1e6,
                    rc / 1e6,
                    trimmed / 1e6
                );
                best_feas = trimmed;
            }
        }
        if processed > 0 {
            println!(
                "gen {gen}: processed {processed}, sigma {:.3}, best_cont {:.4}M",
                run.state().sigma,
                run.best().1 / 1e6
            );
        }
        if window.push(summary.generation_best, run.best().1) {
            println!("tolerance stop at gen {gen}");
            break;
        }
    }
    println!(
        "final best feasible {:.4}M evals {} repairs {} repair_evals {}",
        best_feas / 1e6,
        obj.evaluations(),
        n_repairs,
        repair_evals
    );
}
