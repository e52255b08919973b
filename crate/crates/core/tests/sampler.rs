use proptest::prelude::*;
use topoforge::fem::DesignDomain;
use topoforge::scenario::{
    decode_condition_tensor, encode_condition_tensor, fixed_edge_of, sample_scenario, Split, VolumeFraction,
};

const DRAWS: u64 = 10_000;

fn domain() -> DesignDomain {
    DesignDomain::new(100, 100).unwrap()
}

#[test]
fn volume_fraction_statistics() {
    let v: Vec<f64> = (0..DRAWS)
        .map(|s| match sample_scenario(s, Split::Train, domain()).volfrac {
            VolumeFraction::Uniform(v) => v,
            VolumeFraction::Field(_) => unreachable!("sampler draws uniform targets"),
        })
        .collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((0.295..=0.305).contains(&mean), "mean {mean}");
    assert!((0.045..=0.055).contains(&std), "std {std}");
    assert!(v.iter().all(|x| (0.1..=0.6).contains(x)));
}

#[test]
fn load_count_matches_truncated_poisson_mean() {
    let lambda: f64 = 2.0;
    // E[K | K >= 1] = lambda / (1 - e^-lambda); c is the truncation factor
    let c = 1.0 / (1.0 - (-lambda).exp());
    let mean = (0..DRAWS)
        .map(|s| sample_scenario(s, Split::Train, domain()).loads.len() as f64)
        .sum::<f64>()
        / DRAWS as f64;
    assert!(mean >= 1.9 * c && mean <= 2.1 * c, "mean {mean}, c {c}");
}

#[test]
fn test_split_never_loads_only_the_boundary() {
    let d = domain();
    for seed in 0..500 {
        let s = sample_scenario(seed, Split::Test, d);
        assert!(s.loads.iter().any(|l| l.i > 0 && l.i < d.nx && l.j > 0 && l.j < d.ny));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn same_seed_same_bytes(seed in any::<u64>(), split in prop::sample::select(vec![Split::Train, Split::Validation, Split::Test])) {
        let a = sample_scenario(seed, split, domain()).to_json().unwrap();
        let b = sample_scenario(seed, split, domain()).to_json().unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn train_loads_face_the_supports(seed in any::<u64>(), nx in 2usize..40, ny in 2usize..40) {
        let d = DesignDomain::new(nx, ny).unwrap();
        let s = sample_scenario(seed, Split::Train, d);
        let edge = fixed_edge_of(&s).unwrap();
        for l in &s.loads {
            prop_assert_eq!(edge.distance(&d, (l.i, l.j)), edge.span(&d));
        }
    }

    #[test]
    fn tensor_round_trip(seed in any::<u64>(), complexity in 1u32..40, split in prop::sample::select(vec![Split::Train, Split::Test])) {
        let d = DesignDomain::new(30, 20).unwrap();
        let mut s = sample_scenario(seed, split, d);
        s.complexity = complexity;
        let t = encode_condition_tensor(&s, &d, None).unwrap();
        prop_assert_eq!(t.bc_x.iter().filter(|v| **v != 0.0).count(), s.fixed_nodes.len());
        prop_assert_eq!(&t.bc_x, &t.bc_y);
        let loaded = t.f_x.iter().zip(&t.f_y).filter(|(x, y)| *x * *x + *y * *y > 0.0).count();
        prop_assert_eq!(loaded, s.loads.len());

        let back = decode_condition_tensor(&t);
        let mut fixed = s.fixed_nodes.clone();
        fixed.sort_by_key(|&(i, j)| (j, i));
        prop_assert_eq!(back.fixed_nodes, fixed);
        prop_assert_eq!(back.volfrac, s.volfrac.clone());
        prop_assert_eq!(back.complexity, complexity);
        let mut loads = s.loads.clone();
        loads.sort_by_key(|l| (l.j, l.i));
        prop_assert_eq!(back.loads.len(), loads.len());
        for (a, b) in back.loads.iter().zip(&loads) {
            prop_assert_eq!((a.i, a.j), (b.i, b.j));
            let diff = (a.theta_deg - b.theta_deg).rem_euclid(360.0);
            prop_assert!(diff.min(360.0 - diff) <= 0.5);
        }
    }
}
