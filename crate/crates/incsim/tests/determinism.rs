//! Simulated paths must be pure functions of (spec, seed): identical across
//! reruns, across thread-pool sizes, and sensitive to the seed.

use incsim::distributions::{LevySeed, NigParams, StableParams};
use incsim::gaussian::{simulate_gaussian, CorrelationFunction};
use incsim::lss::{simulate_lss, Kernel};
use incsim::trawl::{simulate_trawl, TrawlProcessSpec, TrawlSet};

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

fn gaussian_path(seed: u64) -> Vec<f64> {
    let r = CorrelationFunction::StretchedExponential {
        lambda: 1.0,
        kappa: 0.7,
    };
    simulate_gaussian(&r, 4096, 0.05, seed).unwrap().into_values()
}

fn trawl_path(seed: u64) -> Vec<f64> {
    let mut spec = TrawlProcessSpec::new(
        TrawlSet::Power {
            lambda: 1.0,
            nu: 2.0,
        },
        LevySeed::Nig(NigParams {
            alpha: 2.0,
            beta: 0.5,
            mu: 0.0,
            delta: 1.0,
        }),
        0.05,
    );
    spec.truncation_eps = 1e-2;
    spec.cell_budget = 500.0;
    simulate_trawl(&spec, 4096, seed).unwrap().into_values()
}

fn lss_path(seed: u64) -> Vec<f64> {
    let g = Kernel::ExpKernel {
        c: 1.0,
        lambda: 1.0,
    };
    let p = StableParams {
        alpha: 1.4,
        gamma: 1.0,
    };
    simulate_lss(&g, &p, 4096, 0.02, seed).unwrap().into_values()
}

fn bssprime_path(seed: u64) -> Vec<f64> {
    let corr = CorrelationFunction::Exponential { lambda: 1.0 };
    let spec = incsim::bssprime::BssPrimeSpec {
        mu_loc: 0.1,
        beta_coef: 0.2,
        base_corr: corr,
        vol: incsim::bssprime::VolatilityModel::AbsGaussRoot(corr),
        pairing: true,
    };
    incsim::bssprime::simulate_bssprime(&spec, 4096, 0.05, seed)
        .unwrap()
        .into_values()
}

#[test]
fn paths_are_byte_identical_across_thread_pool_sizes() {
    let cases: [(&str, fn(u64) -> Vec<f64>); 4] = [
        ("gaussian", gaussian_path),
        ("trawl", trawl_path),
        ("lss", lss_path),
        ("bssprime", bssprime_path),
    ];
    for (name, path) in cases {
        let single = in_pool(1, || path(99));
        for threads in [2, 4] {
            let multi = in_pool(threads, || path(99));
            assert_eq!(
                single.iter().map(|v| v.to_bits()).collect::<Vec<u64>>(),
                multi.iter().map(|v| v.to_bits()).collect::<Vec<u64>>(),
                "{name} differs between 1 and {threads} threads"
            );
        }
    }
}

#[test]
fn reruns_are_byte_identical_and_seeds_matter() {
    let cases: [(&str, fn(u64) -> Vec<f64>); 4] = [
        ("gaussian", gaussian_path),
        ("trawl", trawl_path),
        ("lss", lss_path),
        ("bssprime", bssprime_path),
    ];
    for (name, path) in cases {
        let a = path(7);
        let b = path(7);
        assert_eq!(
            a.iter().map(|v| v.to_bits()).collect::<Vec<u64>>(),
            b.iter().map(|v| v.to_bits()).collect::<Vec<u64>>(),
            "{name} rerun differs"
        );
        let c = path(8);
        assert_ne!(a, c, "{name} ignores its seed");
    }
}
