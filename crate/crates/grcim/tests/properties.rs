//! Cross-module properties of the public API.

use grcim::adcspec::required_enob;
use grcim::energy::{energy_map, ArrayModel, Dimensioning, MapGrid};
use grcim::formats::{decode, quantize};
use grcim::mac::{ideal_dot, quantize_all, simulate};
use grcim::stimulus::sample;
use grcim::{ArchConfig, DistributionSpec, FpFormat, Granularity};
use proptest::prelude::*;

fn fmt(ne: u32, nm: u32) -> FpFormat {
    FpFormat::new(ne, nm).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn analog_output_is_a_convex_combination(
        x in prop::collection::vec(-1.0f64..=1.0, 1..48),
        w_seed in any::<u64>(),
        ne in 1u32..=4,
        nm in 1u32..=4,
        unit in any::<bool>(),
    ) {
        let n = x.len();
        let (x_fmt, w_fmt) = (fmt(ne, nm), fmt(2, 1));
        let w: Vec<f64> = sample(&DistributionSpec::UNIFORM, n, w_seed).unwrap().iter().map(|s| s.value).collect();
        let gran = if unit { Granularity::Unit } else { Granularity::Row };
        let cfg = ArchConfig::gain_ranging(gran, x_fmt, w_fmt).with_rows(n).with_limit(None);
        let t = simulate(&quantize_all(&x, x_fmt).unwrap(), &quantize_all(&w, w_fmt).unwrap(), &cfg).unwrap();
        let bound = t.products.iter().fold(0.0f64, |a, m| a.max(m.abs()));
        prop_assert!(t.z_analog.abs() <= bound * (1.0 + 1e-12));
        prop_assert!(t.n_eff >= 1.0 - 1e-12 && t.n_eff <= n as f64 * (1.0 + 1e-12));
    }

    #[test]
    fn both_architectures_compute_the_same_digital_dot(
        x in prop::collection::vec(-1.0f64..=1.0, 1..48),
        seed in any::<u64>(),
    ) {
        let n = x.len();
        let (x_fmt, w_fmt) = (fmt(3, 2), fmt(2, 1));
        let w: Vec<f64> = sample(&DistributionSpec::MaxEntropy(w_fmt), n, seed).unwrap().iter().map(|s| s.value).collect();
        let xq = quantize_all(&x, x_fmt).unwrap();
        let wq = quantize_all(&w, w_fmt).unwrap();
        let xv: Vec<f64> = xq.iter().map(|q| decode(*q, x_fmt)).collect();
        let reference = ideal_dot(&xv, &w).unwrap();
        let conv = simulate(&xq, &wq, &ArchConfig::conventional(x_fmt, w_fmt).with_rows(n)).unwrap();
        let gr = simulate(&xq, &wq, &ArchConfig::gain_ranging(Granularity::Unit, x_fmt, w_fmt).with_rows(n).with_limit(None)).unwrap();
        prop_assert!((conv.z_digital - reference).abs() <= 1e-12);
        prop_assert!((gr.z_digital - reference).abs() <= 1e-12);
    }

    #[test]
    fn max_entropy_samples_are_codes(ne in 0u32..=5, nm in 1u32..=6, seed in any::<u64>()) {
        let f = fmt(ne, nm);
        for s in sample(&DistributionSpec::MaxEntropy(f), 64, seed).unwrap() {
            prop_assert_eq!(decode(quantize(s.value, f).unwrap(), f), s.value);
            prop_assert!(s.value.abs() <= 1.0);
        }
    }

    #[test]
    fn samples_are_prefix_stable(seed in any::<u64>(), n in 1usize..200) {
        let spec = DistributionSpec::gaussian_outliers(0.01, 50.0);
        let long = sample(&spec, 200, seed).unwrap();
        prop_assert_eq!(&sample(&spec, n, seed).unwrap()[..], &long[..n]);
    }
}

#[test]
fn gain_ranging_never_needs_more_resolution() {
    let w = fmt(2, 1);
    let wd = DistributionSpec::MaxEntropy(w);
    for (ne, nm) in [(2, 2), (3, 1), (3, 3), (4, 2)] {
        let x = fmt(ne, nm);
        for xd in [
            DistributionSpec::UNIFORM,
            DistributionSpec::gaussian_outliers(0.01, 50.0),
        ] {
            let c = required_enob(&ArchConfig::conventional(x, w), &xd, &wd, 20_000, 3).unwrap();
            let g = required_enob(
                &ArchConfig::gain_ranging(Granularity::Unit, x, w).with_limit(None),
                &xd,
                &wd,
                20_000,
                3,
            )
            .unwrap();
            assert!(
                g.enob_required_cont.unwrap() <= c.enob_required_cont.unwrap(),
                "E{ne}M{nm} {xd}"
            );
        }
    }
}

#[test]
fn required_enob_grows_with_mantissa() {
    let w = fmt(2, 1);
    let wd = DistributionSpec::MaxEntropy(w);
    let enob = |nm| {
        let a = ArchConfig::gain_ranging(Granularity::Unit, fmt(3, nm), w).with_limit(None);
        required_enob(&a, &DistributionSpec::UNIFORM, &wd, 20_000, 5)
            .unwrap()
            .enob_required_cont
            .unwrap()
    };
    let e: Vec<f64> = (1..=5).map(enob).collect();
    assert!(e.windows(2).all(|p| p[1] >= p[0]), "{e:?}");
}

#[test]
fn energy_map_rows_are_additive_and_have_one_optimum() {
    let model = ArrayModel::default();
    let dims = Dimensioning::measure(&model).unwrap();
    let grid = MapGrid::stepped((10.79, 40.0, 5.0), (0.0, 12.0, 2.0)).unwrap();
    let cells = energy_map(&grid, &model, &dims);
    assert_eq!(cells.len(), grid.sqnr_db.len() * grid.excess_bits.len() * 4);
    for pos in cells.chunks(4) {
        for c in pos {
            let parts: f64 = c.energy.slices().iter().map(|(_, v)| v).sum();
            assert!((parts - c.energy.total).abs() <= 1e-9 * c.energy.total);
            assert_eq!(c.point.feasible, c.point.reason.is_none());
            if c.point.feasible {
                assert!(c.energy.total <= model.cap_fj);
            }
        }
        let optima = pos.iter().filter(|c| c.optimal).count();
        let feasible = pos.iter().filter(|c| c.point.feasible).count();
        assert_eq!(optima, usize::from(feasible > 0));
    }
}
