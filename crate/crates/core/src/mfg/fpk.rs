//! Forward transport of the energy distribution.

use ndarray::{Array1, ArrayView1};

use crate::error::{Error, Result};
use crate::model::{check_len, Field, FieldRole, Grid};

/// Cells more negative than this signal an unstable step.
pub const NEGATIVE_TOLERANCE: f64 = 1e-12;

/// One explicit upwind step of `m_t - (P m)_e = 0`.
///
/// `m_i <- m_i + dt/dE (P_{i+1} m_{i+1} - P_i m_i)` with no inflow through
/// `e = E_max`. Mass is lost only across interior faces, so the sum is
/// conserved exactly up to rounding; what reaches `e = 0` stays there
/// because the policy vanishes on that node.
pub fn fpk_step(m: ArrayView1<'_, f64>, policy: ArrayView1<'_, f64>, g: &Grid) -> Result<Array1<f64>> {
    let k = g.energy_nodes();
    check_len(k, m.len())?;
    check_len(k, policy.len())?;
    let ratio = g.dt / g.de;
    let courant = policy.iter().fold(0.0f64, |acc, &p| acc.max(p.abs())) * ratio;
    if courant > 1.0 + 1e-12 {
        return Err(Error::Cfl { cfl: courant });
    }
    let mut out = Array1::zeros(k);
    for i in 0..k {
        let outflow = policy[i] * m[i];
        let inflow = if i + 1 < k { policy[i + 1] * m[i + 1] } else { 0.0 };
        let v = m[i] + ratio * (inflow - outflow);
        if v < -NEGATIVE_TOLERANCE {
            return Err(Error::NegativeDensity { index: i, value: v });
        }
        out[i] = v.max(0.0);
    }
    Ok(out)
}

/// Runs [`fpk_step`] across the frame; slice 0 is `m0`.
pub fn fpk_forward(m0: ArrayView1<'_, f64>, policy: &Field, g: &Grid) -> Result<Field> {
    policy.check_grid(g)?;
    check_len(g.energy_nodes(), m0.len())?;
    let mut m = Field::zeros(FieldRole::Density, g);
    m.slice_mut(0).assign(&m0);
    for n in 0..g.n_time {
        let next = fpk_step(m.slice(n), policy.slice(n), g)?;
        m.slice_mut(n + 1).assign(&next);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{slice_mass, uniform_density, SystemParams};
    use proptest::prelude::*;

    fn grid() -> Grid {
        Grid::default_for(&SystemParams::reference()).unwrap()
    }

    #[test]
    fn zero_policy_is_identity() {
        let g = grid();
        let m0 = uniform_density(&g);
        let policy = Field::zeros(FieldRole::Policy, &g);
        let m = fpk_forward(m0.view(), &policy, &g).unwrap();
        for n in 0..g.time_nodes() {
            assert_eq!(m.slice(n), m0.view());
        }
    }

    #[test]
    fn cfl_violation_rejected() {
        let g = grid();
        let m0 = uniform_density(&g);
        let fast = Array1::from_elem(g.energy_nodes(), 2.0 * g.de / g.dt);
        assert!(matches!(fpk_step(m0.view(), fast.view(), &g), Err(Error::Cfl { .. })));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let g = grid();
        let m0 = Array1::zeros(5);
        let pol = Array1::zeros(g.energy_nodes());
        assert!(fpk_step(m0.view(), pol.view(), &g).is_err());
    }

    #[test]
    fn constant_speed_transport_converges_to_exact_shift() {
        // Translating step profile m0 = 2/E on [E/2, E]: after time t the
        // exact solution is m0(e + P t) away from the absorbing node. The L1
        // error shrinks as the lattice is refined at fixed Courant number.
        let p = SystemParams::reference();
        let speed = 0.01;
        let mut errors = Vec::new();
        for scale in [1usize, 2, 4, 8] {
            let g = Grid::new(&p, 100 * scale, 30 * scale).unwrap();
            let k = g.energy_nodes();
            let mut m = Array1::from_shape_fn(k, |i| if g.energy(i) >= p.e_max / 2.0 { 1.0 } else { 0.0 });
            let mass = slice_mass(m.view(), &g);
            m /= mass;
            let mut policy = Array1::from_elem(k, speed);
            policy[0] = 0.0;
            let steps = g.n_time / 4;
            let mut cur = m.clone();
            for _ in 0..steps {
                cur = fpk_step(cur.view(), policy.view(), &g).unwrap();
            }
            let shift = speed * steps as f64 * g.dt;
            let exact = |e: f64| {
                let src = e + shift;
                if src >= p.e_max / 2.0 && src <= p.e_max { 1.0 / mass } else { 0.0 }
            };
            let err: f64 = (1..k).map(|i| (cur[i] - exact(g.energy(i))).abs() * g.de).sum();
            errors.push(err);
        }
        for w in errors.windows(2) {
            assert!(w[1] < w[0], "{errors:?}");
        }
        assert!(errors[3] < 0.5 * errors[0], "{errors:?}");
    }

    proptest! {
        #[test]
        fn step_conserves_mass_and_sign(
            weights in proptest::collection::vec(0.0f64..1.0, 31),
            powers in proptest::collection::vec(0.0f64..0.025, 31),
        ) {
            let g = grid();
            let mut m = Array1::from(weights);
            let total = slice_mass(m.view(), &g);
            prop_assume!(total > 0.0);
            m /= total;
            let mut pol = Array1::from(powers);
            pol[0] = 0.0;
            let next = fpk_step(m.view(), pol.view(), &g).unwrap();
            prop_assert!(next.iter().all(|&x| x >= 0.0));
            prop_assert!((slice_mass(next.view(), &g) - 1.0).abs() < 1e-12);
        }
    }
}
