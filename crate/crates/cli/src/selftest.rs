//! Quick sanity checks of an installed binary (a few seconds in total).

use std::f64::consts::PI;

use degenlab_core::profile::{make_profile, ProfileDescriptor};
use degenlab_core::shooting::find_sigma0;
use degenlab_core::spectrum::spectrum_of;
use degenlab_core::torus::{DiscreteOperator, SobolevNorm};
use degenlab_core::torus_spec::{extend_to_torus, TorusGrid, Variant};
use degenlab_core::Profile;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{LoadedConfig, EXPERIMENTS};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn flat() -> Profile {
    Profile::constant(1.0, 0.0).expect("valid constant profile")
}

fn bumpy() -> Profile {
    make_profile(ProfileDescriptor::Polynomial { alpha: vec![1.0, 0.3, 0.25], beta: vec![0.5, 0.0, 1.0] }, 1)
        .expect("valid polynomial profile")
}

pub fn run_checks(seed: u64) -> Vec<Check> {
    let mut out = Vec::new();

    let scan = find_sigma0(&flat(), 25.0, 3);
    out.push(match scan {
        Ok(s) if s.values.len() == 3 => {
            let err = s
                .values
                .iter()
                .zip([PI * PI / 4.0, PI * PI, 9.0 * PI * PI / 4.0])
                .map(|(w, e)| (w - e).abs() / e)
                .fold(0.0, f64::max);
            check("dirichlet roots of the flat profile", err <= 1e-8, format!("max relative error {err:.2e}"))
        }
        other => check("dirichlet roots of the flat profile", false, format!("{other:?}")),
    });

    out.push(match spectrum_of(&flat(), 30.0, 4) {
        Ok(r) => {
            let s0 = r.s0.unwrap_or(f64::NAN);
            check(
                "threshold s0 of the flat profile",
                (s0 - 1.6484543).abs() <= 1e-6 && !r.zero_membership_flag,
                format!("s0 = {s0:.9}"),
            )
        }
        Err(e) => check("threshold s0 of the flat profile", false, e.to_string()),
    });

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match extend_to_torus(&bumpy(), 2.0, 1.0, TorusGrid::new(32, 32), Variant::Diffusion) {
        Ok(spec) => {
            let op = DiscreteOperator::assemble(&spec);
            out.push(check(
                "operator symmetry",
                op.symmetry_defect() == 0.0,
                format!("defect {:e}", op.symmetry_defect()),
            ));
            let ones = op.apply_vec(&vec![1.0; op.grid.len()]);
            let row = ones.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            out.push(check("constants in the kernel", row <= 1e-12, format!("max |L 1| = {row:.2e}")));
            let u: Vec<f64> = (0..op.grid.len()).map(|_| rng.random::<f64>() - 0.5).collect();
            let lhs = op.inner(&op.apply_vec(&u), &u);
            let rel = (lhs - op.energy_terms(&u).total()).abs() / lhs.abs();
            out.push(check("energy identity", rel <= 1e-10, format!("relative defect {rel:.2e}")));
            let sob = SobolevNorm::new(&spec);
            let rel = match sob.norm(&u, 0.0) {
                Ok(n) => (n - op.norm(&u)).abs() / op.norm(&u),
                Err(_) => f64::INFINITY,
            };
            out.push(check("Parseval for the Sobolev norm", rel <= 1e-12, format!("relative defect {rel:.2e}")));
        }
        Err(e) => out.push(check("torus assembly", false, e.to_string())),
    }

    let bad = EXPERIMENTS.iter().filter(|n| LoadedConfig::builtin(n).is_err()).count();
    out.push(check("built-in configs validate", bad == 0, format!("{bad} invalid")));
    out
}
