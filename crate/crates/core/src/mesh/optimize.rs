use std::io::Write;

use thiserror::Error;

use super::{EnergyProblem, EnergyTerms, EnergyWeights, MeshPair, SmoothnessForm, VertexMesh};
use crate::imaging::LabelMap;

/// Units in which the learning rate (the per-iteration step length) is given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepUnits {
    /// Viewport-plane units of the background projection, the space the
    /// meshes are built in. Steps then cover the same fraction of the
    /// viewport at any mesh resolution.
    #[default]
    Plane,
    /// Mesh cells.
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeOptions {
    pub iterations: usize,
    pub learning_rate: f64,
    pub step_units: StepUnits,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub smoothness: SmoothnessForm,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            iterations: 100,
            learning_rate: 0.02,
            step_units: StepUnits::Plane,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            smoothness: SmoothnessForm::Relative,
        }
    }
}

#[derive(Debug, Error)]
pub enum MeshOptimizeError {
    #[error("invalid optimizer settings: {0}")]
    Settings(String),
    #[error("energy diverged at iteration {iteration}: {energy:.6e} exceeds 10x the initial {initial:.6e}")]
    Diverged { iteration: usize, energy: f64, initial: f64 },
}

/// Energy terms after `iteration` updates (row 0 is the initial mesh).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub terms: EnergyTerms,
}

#[derive(Debug, Clone)]
pub struct MeshOptimization {
    /// Optimized mesh `M_o`.
    pub mesh: VertexMesh,
    pub trace: Vec<TraceRow>,
    /// Iteration whose mesh was returned.
    pub selected_iteration: usize,
}

impl MeshOptimization {
    pub fn initial_energy(&self) -> f64 {
        self.trace[0].terms.total
    }

    pub fn final_energy(&self) -> f64 {
        self.trace[self.selected_iteration].terms.total
    }

    /// Trace as CSV: `iter,E_c,E_ld,E_s,E_a,E_t`.
    pub fn write_trace_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["iter", "E_c", "E_ld", "E_s", "E_a", "E_t"])?;
        for row in &self.trace {
            let t = row.terms;
            wtr.write_record([
                row.iteration.to_string(),
                format!("{:.9e}", t.conformality),
                format!("{:.9e}", t.line),
                format!("{:.9e}", t.smoothness),
                format!("{:.9e}", t.asymmetric),
                format!("{:.9e}", t.total),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Minimizes the mesh energy starting from `m_b` with adaptive-moment
/// gradient steps.
///
/// The returned mesh is the lowest-energy iterate, so the result never has
/// more energy than `m_b`.
pub fn optimize_mesh(
    pair: &MeshPair,
    seg_vp: &LabelMap,
    weights: EnergyWeights,
    options: &OptimizeOptions,
) -> Result<MeshOptimization, MeshOptimizeError> {
    if options.iterations == 0 {
        return Err(MeshOptimizeError::Settings("at least one iteration is required".into()));
    }
    if !(options.learning_rate > 0.0 && options.learning_rate.is_finite()) {
        return Err(MeshOptimizeError::Settings(format!(
            "learning rate must be positive, got {}",
            options.learning_rate
        )));
    }
    if !weights.is_valid() {
        return Err(MeshOptimizeError::Settings(format!("energy weights must be >= 0, got {weights:?}")));
    }
    let problem = EnergyProblem::new(pair, seg_vp, weights, options.smoothness);
    let mut grid_options = *options;
    if options.step_units == StepUnits::Plane {
        grid_options.learning_rate /= pair.cell_size;
    }
    run_adam(&problem, &pair.m_b, &grid_options)
}

/// Adam on an arbitrary energy problem, starting from `start`.
pub(crate) fn run_adam(
    problem: &EnergyProblem,
    start: &VertexMesh,
    options: &OptimizeOptions,
) -> Result<MeshOptimization, MeshOptimizeError> {
    let n = start.vertices().len();
    let mut v = start.clone();
    let mut grad = vec![[0.0; 2]; n];
    let mut first = vec![[0.0; 2]; n];
    let mut second = vec![[0.0; 2]; n];

    let initial = problem.evaluate(v.vertices(), Some(&mut grad));
    let mut trace = vec![TraceRow {
        iteration: 0,
        terms: initial,
    }];
    let mut best = (initial.total, 0usize, v.clone());
    // Adam moves every vertex by about one learning rate per step whatever
    // the gradient size, so a near-zero start energy is no scale for growth
    let w = problem.weights();
    let step_energy =
        (w.lambda_c + w.lambda_b + w.lambda_s + w.lambda_a) * n as f64 * options.learning_rate * options.learning_rate;
    let limit = 10.0 * initial.total.max(step_energy).max(f64::MIN_POSITIVE);

    let (b1, b2) = (options.beta1, options.beta2);
    for t in 1..=options.iterations {
        let c1 = 1.0 - b1.powi(t as i32);
        let c2 = 1.0 - b2.powi(t as i32);
        for k in 0..n {
            for c in 0..2 {
                let g = grad[k][c];
                first[k][c] = b1 * first[k][c] + (1.0 - b1) * g;
                second[k][c] = b2 * second[k][c] + (1.0 - b2) * g * g;
                let m_hat = first[k][c] / c1;
                let v_hat = second[k][c] / c2;
                v.vertices_mut()[k][c] -= options.learning_rate * m_hat / (v_hat.sqrt() + options.epsilon);
            }
        }
        let terms = problem.evaluate(v.vertices(), Some(&mut grad));
        trace.push(TraceRow { iteration: t, terms });
        if !terms.total.is_finite() || terms.total > limit {
            return Err(MeshOptimizeError::Diverged {
                iteration: t,
                energy: terms.total,
                initial: initial.total,
            });
        }
        if terms.total < best.0 {
            best = (terms.total, t, v.clone());
        }
    }
    Ok(MeshOptimization {
        mesh: best.2,
        trace,
        selected_iteration: best.1,
    })
}
