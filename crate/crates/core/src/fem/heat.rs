use super::{solve_resolvent, FemSpace, HeatContentCurve};
use crate::error::{Error, Result};
use crate::linalg::{dot, pcg};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug)]
pub struct HeatOptions<T> {
    /// Steps of the quadratic grid per decade of `t`.
    pub steps_per_decade: usize,
    /// Hard cap on the total number of implicit Euler steps.
    pub max_steps: usize,
    pub cg_tol: T,
}

impl<T: Real> Default for HeatOptions<T> {
    fn default() -> Self {
        Self { steps_per_decade: 400, max_steps: 200_000, cg_tol: T::tol_floor(1e-12, 100.0) }
    }
}

/// Heat content `Q(t) = 1^T M v(t)` of `M v' = -K v`, `v(0) = 1`, `v = 0` on
/// the boundary, sampled at the requested increasing positive times.
pub fn heat_content<T: Real>(space: &FemSpace<T>, times: &[T]) -> Result<HeatContentCurve<T>> {
    heat_content_with(space, times, &HeatOptions::default())
}

pub fn heat_content_with<T: Real>(space: &FemSpace<T>, times: &[T], opts: &HeatOptions<T>) -> Result<HeatContentCurve<T>> {
    let (grid, values, picks) = heat_trajectory(space, times, opts)?;
    Ok(HeatContentCurve {
        times: picks.iter().map(|&k| grid[k]).collect(),
        values: picks.iter().map(|&k| values[k]).collect(),
        scheme: format!(
            "implicit Euler, {} steps on t_k = T (k/m)^2, {} per decade",
            grid.len() - 1,
            opts.steps_per_decade
        ),
        steps: grid.len() - 1,
    })
}

/// Full stepping history: grid (starting at 0), heat content on the grid and
/// the grid indices of the requested times.
pub fn heat_trajectory<T: Real>(space: &FemSpace<T>, times: &[T], opts: &HeatOptions<T>) -> Result<(Vec<T>, Vec<T>, Vec<usize>)> {
    if times.is_empty() {
        return Err(Error::InvalidInput("no heat-content times requested".into()));
    }
    if times.iter().any(|&t| !(t > T::zero()) || !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("heat-content times must be positive and increasing".into()));
    }
    let diam = space.diameter();
    let t_end = *times.last().unwrap();
    if t_end > diam * diam * T::lit(1.0 + 1e-9) {
        return Err(Error::InvalidInput(format!(
            "heat-content time {t_end} exceeds diam^2 = {}",
            diam * diam
        )));
    }
    let decades = (t_end / times[0]).log10().max(T::one()).to_f64_lossy();
    let m = (opts.steps_per_decade as f64 * decades).ceil() as usize;
    if m + times.len() > opts.max_steps {
        return Err(Error::Resource { what: format!("{} heat-equation time steps", m + times.len()), cap: opts.max_steps });
    }
    let mf = T::from_usize_lossy(m);
    let mut grid: Vec<T> = (1..=m)
        .map(|k| {
            let r = T::from_usize_lossy(k) / mf;
            t_end * r * r
        })
        .collect();
    grid.extend_from_slice(times);
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let close = |a: T, b: T| (a - b).abs() <= T::lit(1e-12) * b.abs();
    grid.dedup_by(|a, b| close(*a, *b));
    grid.insert(0, T::zero());
    let picks: Vec<usize> = times
        .iter()
        .map(|&t| grid.iter().position(|&g| close(g, t)).expect("requested time is on the grid"))
        .collect();

    let load = space.interior_load();
    let kii = space.stiffness_interior();
    let mii = space.mass_interior();
    let mut values = Vec::with_capacity(grid.len());
    values.push(space.area());
    // v(0) = 1 everywhere, so the first right-hand side is (M 1)_I
    let mut rhs = load.clone();
    let mut v = vec![T::one(); load.len()];
    let mut q_prev = space.area();
    for k in 1..grid.len() {
        let dt = grid[k] - grid[k - 1];
        let a = mii.linear_combination(T::one(), kii, dt);
        let out = pcg(&a, &rhs, Some(&v), opts.cg_tol, 10 * load.len() + 1000)?;
        v = out.x;
        let q = dot(&load, &v);
        if q > q_prev {
            log::debug!("heat content increased at t = {}: {} > {}", grid[k], q, q_prev);
        }
        q_prev = q;
        values.push(q);
        rhs = mii.mul_vec(&v);
    }
    Ok((grid, values, picks))
}

/// Both sides of `int U_s = int_0^inf e^{st} Q(t) dt`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaplaceCheck<T> {
    pub s: T,
    /// `1^T M U_s`.
    pub lhs: T,
    /// Trapezoidal transform of the computed heat content with an
    /// exponential tail beyond the last time.
    pub rhs: T,
}

impl<T: Real> LaplaceCheck<T> {
    pub fn relative_difference(&self) -> T {
        (self.lhs - self.rhs).abs() / self.lhs.abs()
    }
}

pub fn laplace_transform_check<T: Real>(space: &FemSpace<T>, s: T) -> Result<LaplaceCheck<T>> {
    Ok(laplace_transform_checks(space, &[s])?.remove(0))
}

/// Several Laplace checks sharing one heat trajectory up to `t = diam^2`.
pub fn laplace_transform_checks<T: Real>(space: &FemSpace<T>, s_values: &[T]) -> Result<Vec<LaplaceCheck<T>>> {
    if let Some(&s) = s_values.iter().find(|&&s| !(s < T::zero())) {
        return Err(Error::InvalidInput(format!("Laplace check needs s < 0, got {s}")));
    }
    let d = space.diameter();
    let t_end = d * d;
    let t_first = t_end * T::lit(1e-4);
    let (grid, q, _) = heat_trajectory(space, &[t_first, t_end], &HeatOptions::default())?;
    let e1 = space.dirichlet_e1()?;
    s_values
        .iter()
        .map(|&s| {
            let u = solve_resolvent(space, s)?;
            let lhs = space.integral(&u.values);
            let mut rhs = T::zero();
            for k in 1..grid.len() {
                let a = (s * grid[k - 1]).exp() * q[k - 1];
                let b = (s * grid[k]).exp() * q[k];
                rhs += (grid[k] - grid[k - 1]) * (a + b) / T::lit(2.0);
            }
            let last = grid.len() - 1;
            rhs += q[last] * (s * grid[last]).exp() / (e1 - s);
            Ok(LaplaceCheck { s, lhs, rhs })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::assemble;
    use crate::geometry::{generate_mesh, Domain};

    #[test]
    fn decreasing_and_bounded() {
        let space = assemble(generate_mesh(&Domain::unit_square(), 0.05f64, 0.0).unwrap()).unwrap();
        let times: Vec<f64> = (1..=20).map(|k| 0.005 * k as f64).collect();
        let c = heat_content(&space, &times).unwrap();
        assert_eq!(c.times.len(), 20);
        assert!(c.values.windows(2).all(|w| w[1] < w[0]));
        assert!(c.values.iter().all(|&q| q > 0.0 && q < space.area()));
    }

    #[test]
    fn rejects_bad_times() {
        let space = assemble(generate_mesh(&Domain::unit_square(), 0.25f64, 0.0).unwrap()).unwrap();
        assert!(heat_content(&space, &[0.2, 0.1]).is_err());
        assert!(heat_content(&space, &[0.0]).is_err());
        assert!(heat_content(&space, &[5.0]).is_err());
        let opts = HeatOptions { max_steps: 10, ..HeatOptions::default() };
        assert!(matches!(heat_content_with(&space, &[0.1], &opts), Err(Error::Resource { .. })));
    }
}
