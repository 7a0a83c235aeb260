use degenlab_core::io::*;
use degenlab_core::mellin::{StripField, StripGrid};
use degenlab_core::profile::CoefficientProfile;
use degenlab_core::torus::{heat_evolve, DiscreteOperator, HeatOptions, HeatScheme, SobolevNorm};
use degenlab_core::torus_spec::{extend_to_torus, TorusGrid, Variant};
use degenlab_core::{Cplx, Error};
use proptest::prelude::*;

proptest! {
    #[test]
    fn seventeen_digits_round_trip(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        prop_assume!(x.is_finite());
        let back: f64 = fmt_f64(x).parse().unwrap();
        prop_assert_eq!(back.to_bits(), x.to_bits());
    }
}

#[test]
fn strip_field_binary_round_trip() {
    let grid = StripGrid::<f64>::new(65, -6.0, 2.0, 64).unwrap();
    let field = StripField::from_fn(grid, |x: f64, t: f64| Cplx::new((1.0 - x * x) * t.sin(), x * t.cos()));
    let mut buf = Vec::new();
    write_strip_field_bin(&mut buf, &field).unwrap();
    let back = read_strip_field_bin(buf.as_slice()).unwrap();
    assert_eq!(back.grid, field.grid);
    assert_eq!(back.pos, field.pos);
    assert_eq!(back.neg, field.neg);
    buf[0] = b'X';
    assert!(matches!(read_strip_field_bin(buf.as_slice()), Err(Error::Format(_))));
    let mut csv = Vec::new();
    write_strip_field_csv(&mut csv, &field).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 65 * 64);
    assert!(text.starts_with("half,x,u,t,re,im\n"));
}

#[test]
fn triplets_round_trip_and_stay_symmetric() {
    let p = CoefficientProfile::constant(1.0, 0.0).unwrap();
    let spec = extend_to_torus::<f64>(&p, 2.0, 1.0, TorusGrid::new(32, 16), Variant::Diffusion).unwrap();
    let op = DiscreteOperator::assemble(&spec);
    let mut buf = Vec::new();
    write_triplets(&mut buf, &op).unwrap();
    let (rows, cols, entries) = read_triplets(buf.as_slice()).unwrap();
    assert_eq!((rows, cols), (512, 512));
    let orig = op.triplets();
    assert_eq!(entries.len(), orig.len());
    for (a, b) in entries.iter().zip(&orig) {
        assert_eq!((a.0, a.1, a.2.to_bits()), (b.0, b.1, b.2.to_bits()));
    }
    let map: std::collections::HashMap<(usize, usize), f64> = entries.iter().map(|&(r, c, v)| ((r, c), v)).collect();
    assert!(entries.iter().all(|&(r, c, v)| map[&(c, r)] == v));
    assert!(read_triplets("3 3 1\n0 0 x\n".as_bytes()).is_err());
}

#[test]
fn heat_csv_is_numeric_and_complete() {
    let p = CoefficientProfile::constant(1.0, 0.0).unwrap();
    let spec = extend_to_torus(&p, 2.0, 1.0, TorusGrid::new(32, 32), Variant::Diffusion).unwrap();
    let op = DiscreteOperator::assemble(&spec);
    let sob = SobolevNorm::new(&spec);
    let f = degenlab_core::torus::probe::squeezed_bump(&spec, 0.5);
    let mut opts = HeatOptions::new(0.1, 0.5, HeatScheme::ImplicitEuler);
    opts.s_values = vec![0.0, 2.5];
    let run = heat_evolve(&op, &sob, &f, &opts).unwrap();
    let mut buf = Vec::new();
    write_heat_run_csv(&mut buf, &run).unwrap();
    let table = read_numeric_table(buf.as_slice()).unwrap();
    assert_eq!(table.header, vec!["tau", "mean", "mean_zero_l2", "h0", "h2.5"]);
    assert_eq!(table.rows.len(), 6);
    assert_eq!(table.column("h2.5").unwrap(), run.norms[1]);
}
