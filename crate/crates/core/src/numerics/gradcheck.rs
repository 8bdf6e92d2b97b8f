//! Central finite-difference checks against tape gradients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{NumericsError, Tape, Tensor, Var};

/// One compared coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub tensor: usize,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub relative_error: f64,
}

/// `|a - n| / max(|a|, |n|, 1e-6)`; the floor keeps near-zero gradients from
/// inflating the ratio.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Builds `loss = build(tape, params)` once to get analytic gradients, then
/// compares `coordinates` randomly chosen parameter entries against
/// `(f(x+h) - f(x-h)) / 2h`.
pub fn check_gradients<F>(
    params: &[Tensor],
    build: F,
    coordinates: usize,
    step: f64,
    seed: u64,
) -> Result<Vec<Probe>, NumericsError>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var, NumericsError>,
{
    let eval = |values: &[Tensor]| -> Result<f64, NumericsError> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = values.iter().map(|t| tape.parameter(t.clone())).collect();
        let loss = build(&mut tape, &vars)?;
        Ok(tape.value(loss).data()[0])
    };

    let mut tape = Tape::new();
    let vars: Vec<Var> = params.iter().map(|t| tape.parameter(t.clone())).collect();
    let loss = build(&mut tape, &vars)?;
    let grads = tape.backward(loss)?;

    let total: usize = params.iter().map(Tensor::len).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes = Vec::with_capacity(coordinates);
    let mut work = params.to_vec();
    for _ in 0..coordinates.min(total.max(1)) {
        let mut flat = rng.random_range(0..total);
        let mut tensor = 0;
        while flat >= params[tensor].len() {
            flat -= params[tensor].len();
            tensor += 1;
        }
        let analytic = grads.get(vars[tensor]).map_or(0.0, |g| g[flat]);
        let original = work[tensor].data()[flat];
        work[tensor].data_mut()[flat] = original + step;
        let up = eval(&work)?;
        work[tensor].data_mut()[flat] = original - step;
        let down = eval(&work)?;
        work[tensor].data_mut()[flat] = original;
        let numeric = (up - down) / (2.0 * step);
        probes.push(Probe { tensor, index: flat, analytic, numeric, relative_error: relative_error(analytic, numeric) });
    }
    Ok(probes)
}
