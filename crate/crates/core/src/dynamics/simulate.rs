use nalgebra::DVector;

use super::DynamicsError;
use crate::lg::StateSpaceModel;

/// Uniformly sampled time response.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub outputs: Vec<DVector<f64>>,
}

impl Trajectory {
    /// One output channel over time.
    pub fn output(&self, channel: usize) -> Option<Vec<f64>> {
        (channel < self.outputs.first().map_or(0, |y| y.len()))
            .then(|| self.outputs.iter().map(|y| y[channel]).collect())
    }

    pub fn state(&self, index: usize) -> Option<Vec<f64>> {
        (index < self.states.first().map_or(0, |x| x.len())).then(|| self.states.iter().map(|x| x[index]).collect())
    }
}

/// Classical fixed-step RK4 on `x' = Ax + Bu(t)` from `t = 0` to `t_end`.
///
/// Outputs are `y = Cx + Du`; the `F u'` term is not applied.
pub fn simulate<F>(
    ss: &StateSpaceModel,
    input: F,
    t_end: f64,
    dt: f64,
    x0: &DVector<f64>,
) -> Result<Trajectory, DynamicsError>
where
    F: Fn(f64) -> DVector<f64>,
{
    if !(dt > 0.0 && dt.is_finite() && t_end.is_finite() && t_end >= dt) {
        return Err(DynamicsError::InvalidStep { dt, t_end });
    }
    let n = ss.state_count();
    let m = ss.input_count();
    if x0.len() != n {
        return Err(DynamicsError::DimensionMismatch {
            what: "x0",
            expected: n,
            found: x0.len(),
        });
    }
    let checked_input = |t: f64| -> Result<DVector<f64>, DynamicsError> {
        let u = input(t);
        if u.len() != m {
            return Err(DynamicsError::DimensionMismatch {
                what: "input",
                expected: m,
                found: u.len(),
            });
        }
        Ok(u)
    };

    let steps = (t_end / dt).round() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut outputs = Vec::with_capacity(steps + 1);

    let deriv = |x: &DVector<f64>, u: &DVector<f64>| &ss.a * x + &ss.b * u;
    let mut x = x0.clone();
    let mut u = checked_input(0.0)?;
    for k in 0..=steps {
        let t = k as f64 * dt;
        outputs.push(&ss.c * &x + &ss.d * &u);
        times.push(t);
        states.push(x.clone());
        if k == steps {
            break;
        }
        let u_mid = checked_input(t + 0.5 * dt)?;
        let u_end = checked_input(t + dt)?;
        let k1 = deriv(&x, &u);
        let k2 = deriv(&(&x + &k1 * (0.5 * dt)), &u_mid);
        let k3 = deriv(&(&x + &k2 * (0.5 * dt)), &u_mid);
        let k4 = deriv(&(&x + &k3 * dt), &u_end);
        let next = &x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(DynamicsError::NonFiniteState { last_valid_step: k });
        }
        x = next;
        u = u_end;
    }
    Ok(Trajectory { times, states, outputs })
}

/// Cumulative trapezoidal integral of one output channel; starts at 0.
pub fn integrate_signal(tr: &Trajectory, channel: usize) -> Result<Vec<f64>, DynamicsError> {
    let count = tr.outputs.first().map_or(0, |y| y.len());
    let y = tr.output(channel).ok_or(DynamicsError::BadChannel { channel, count })?;
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(y.len());
    for (k, v) in y.iter().enumerate() {
        if k > 0 {
            acc += 0.5 * (tr.times[k] - tr.times[k - 1]) * (v + y[k - 1]);
        }
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn scalar(a: f64) -> StateSpaceModel {
        StateSpaceModel {
            a: DMatrix::from_element(1, 1, a),
            b: DMatrix::from_element(1, 1, 1.0),
            c: DMatrix::from_element(1, 1, 1.0),
            d: DMatrix::zeros(1, 1),
            f: DMatrix::zeros(1, 1),
            state_labels: vec!["x".into()],
            input_labels: vec!["u".into()],
            output_labels: vec!["y".into()],
        }
    }

    fn zero_input(_: f64) -> DVector<f64> {
        DVector::zeros(1)
    }

    #[test]
    fn exponential_decay() {
        let tr = simulate(&scalar(-1.0), zero_input, 1.0, 0.01, &DVector::from_element(1, 1.0)).unwrap();
        assert_eq!(tr.times.len(), 101);
        let x1 = tr.states.last().unwrap()[0];
        assert!((x1 - (-1.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let err = |dt: f64| {
            let tr = simulate(&scalar(-1.0), zero_input, 1.0, dt, &DVector::from_element(1, 1.0)).unwrap();
            (tr.states.last().unwrap()[0] - (-1.0f64).exp()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn zero_input_zero_state_stays_zero() {
        let tr = simulate(&scalar(-2.0), zero_input, 1.0, 0.1, &DVector::zeros(1)).unwrap();
        assert!(tr.states.iter().all(|x| x[0] == 0.0));
    }

    #[test]
    fn rejects_bad_steps() {
        let x0 = DVector::zeros(1);
        assert!(matches!(
            simulate(&scalar(-1.0), zero_input, 0.0, 0.1, &x0),
            Err(DynamicsError::InvalidStep { .. })
        ));
        assert!(matches!(
            simulate(&scalar(-1.0), zero_input, 1.0, 0.0, &x0),
            Err(DynamicsError::InvalidStep { .. })
        ));
    }

    #[test]
    fn blow_up_is_reported() {
        let err = simulate(&scalar(1e3), zero_input, 100.0, 1.0, &DVector::from_element(1, 1.0)).unwrap_err();
        assert!(matches!(err, DynamicsError::NonFiniteState { .. }));
    }

    #[test]
    fn trapezoid_integrals() {
        let tr = Trajectory {
            times: (0..=1000).map(|k| k as f64 * 1e-3).collect(),
            states: vec![DVector::zeros(0); 1001],
            outputs: vec![DVector::from_element(1, 1.0); 1001],
        };
        assert!((integrate_signal(&tr, 0).unwrap().last().unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(
            integrate_signal(&tr, 1),
            Err(DynamicsError::BadChannel { .. })
        ));

        let dt = 1e-3;
        let steps = (std::f64::consts::PI / dt).floor() as usize;
        let mut times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
        times.push(std::f64::consts::PI);
        let tr = Trajectory {
            outputs: times.iter().map(|t| DVector::from_element(1, t.sin())).collect(),
            states: vec![DVector::zeros(0); times.len()],
            times,
        };
        let total = *integrate_signal(&tr, 0).unwrap().last().unwrap();
        assert!((total - 2.0).abs() < 1e-5, "{total}");
    }
}
