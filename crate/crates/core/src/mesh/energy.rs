use super::{correction_strength, MeshPair, VertexMesh};
use crate::imaging::LabelMap;

/// Weights of the four energy terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyWeights {
    pub lambda_c: f64,
    pub lambda_b: f64,
    pub lambda_s: f64,
    pub lambda_a: f64,
}

impl Default for EnergyWeights {
    fn default() -> Self {
        Self {
            lambda_c: 0.3,
            lambda_b: 1.5,
            lambda_s: 0.5,
            lambda_a: 3.0,
        }
    }
}

impl EnergyWeights {
    pub fn is_valid(&self) -> bool {
        [self.lambda_c, self.lambda_b, self.lambda_s, self.lambda_a]
            .iter()
            .all(|w| w.is_finite() && *w >= 0.0)
    }

    fn of(&self, term: Term) -> f64 {
        match term {
            Term::Conformality => self.lambda_c,
            Term::Line => self.lambda_b,
            Term::Smoothness => self.lambda_s,
            Term::Asymmetric => self.lambda_a,
        }
    }
}

/// Which smoothness penalty to use between neighbouring vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SmoothnessForm {
    /// `|v_i - v_j|^2`. Pulls the whole lattice toward a point, which the
    /// boundary term resists only weakly.
    Absolute,
    /// `|(v_i - v_j) - (b_i - b_j)|^2`.
    #[default]
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Term {
    Conformality,
    Line,
    Smoothness,
    Asymmetric,
}

impl Term {
    pub const ALL: [Term; 4] = [Term::Conformality, Term::Line, Term::Smoothness, Term::Asymmetric];
}

/// Unweighted term values and the weighted total.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyTerms {
    pub conformality: f64,
    pub line: f64,
    pub smoothness: f64,
    pub asymmetric: f64,
    pub total: f64,
}

impl EnergyTerms {
    pub fn get(&self, term: Term) -> f64 {
        match term {
            Term::Conformality => self.conformality,
            Term::Line => self.line,
            Term::Smoothness => self.smoothness,
            Term::Asymmetric => self.asymmetric,
        }
    }

    fn set(&mut self, term: Term, value: f64) {
        match term {
            Term::Conformality => self.conformality = value,
            Term::Line => self.line = value,
            Term::Smoothness => self.smoothness = value,
            Term::Asymmetric => self.asymmetric = value,
        }
    }
}

/// Directed edge `i -> j` with the unit direction of `b_i - b_j`.
#[derive(Debug, Clone, Copy)]
struct Edge {
    i: usize,
    j: usize,
    e: [f64; 2],
    rest: [f64; 2],
}

/// Everything needed to evaluate `E_t` and its gradient for one viewport.
#[derive(Debug, Clone)]
pub struct EnergyProblem {
    w_m: usize,
    h_m: usize,
    weights: EnergyWeights,
    smoothness: SmoothnessForm,
    /// `(vertex, m_i, f_i)` for every vertex lying on an object.
    anchors: Vec<(usize, f64, [f64; 2])>,
    edges: Vec<Edge>,
}

impl EnergyProblem {
    /// Sets up the energy. `seg_vp` is an object-id map of the viewport;
    /// a vertex belongs to the object under the pixel nearest to its rest
    /// position.
    pub fn new(pair: &MeshPair, seg_vp: &LabelMap, weights: EnergyWeights, smoothness: SmoothnessForm) -> Self {
        let (w_m, h_m) = (pair.m_b.width(), pair.m_b.height());
        let sx = seg_vp.width() as f64 / w_m as f64;
        let sy = seg_vp.height() as f64 / h_m as f64;
        let anchors = pair
            .m_b
            .vertices()
            .iter()
            .enumerate()
            .filter_map(|(i, b)| {
                let px = ((b[0] * sx).floor() as usize).min(seg_vp.width() - 1);
                let py = ((b[1] * sy).floor() as usize).min(seg_vp.height() - 1);
                (seg_vp.get(px, py) != 0).then(|| (i, correction_strength(i, w_m, h_m), pair.m_f.vertices()[i]))
            })
            .collect();
        Self::with_anchors(&pair.m_b, anchors, weights, smoothness)
    }

    /// Builds the problem from an explicit list of `(vertex, m_i, f_i)`.
    pub fn with_anchors(
        m_b: &VertexMesh,
        anchors: Vec<(usize, f64, [f64; 2])>,
        weights: EnergyWeights,
        smoothness: SmoothnessForm,
    ) -> Self {
        let (w_m, h_m) = (m_b.width(), m_b.height());
        let b = m_b.vertices();
        let mut edges = Vec::with_capacity(4 * w_m * h_m);
        for n in 0..h_m {
            for m in 0..w_m {
                let i = n * w_m + m;
                let mut push = |j: usize| {
                    let rest = [b[i][0] - b[j][0], b[i][1] - b[j][1]];
                    let len = rest[0].hypot(rest[1]);
                    edges.push(Edge {
                        i,
                        j,
                        e: [rest[0] / len, rest[1] / len],
                        rest,
                    });
                };
                if m > 0 {
                    push(i - 1);
                }
                if m + 1 < w_m {
                    push(i + 1);
                }
                if n > 0 {
                    push(i - w_m);
                }
                if n + 1 < h_m {
                    push(i + w_m);
                }
            }
        }
        Self {
            w_m,
            h_m,
            weights,
            smoothness,
            anchors,
            edges,
        }
    }

    pub fn weights(&self) -> EnergyWeights {
        self.weights
    }

    pub fn anchored_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.anchors.iter().map(|a| a.0)
    }

    pub fn vertex_count(&self) -> usize {
        self.w_m * self.h_m
    }

    /// One unweighted term; its gradient, scaled by `scale`, is added to
    /// `grad` when given.
    pub fn term(&self, term: Term, v: &[[f64; 2]], mut grad: Option<&mut [[f64; 2]]>, scale: f64) -> f64 {
        let mut add = |k: usize, g: [f64; 2]| {
            if let Some(grad) = grad.as_deref_mut() {
                grad[k][0] += scale * g[0];
                grad[k][1] += scale * g[1];
            }
        };
        match term {
            Term::Conformality => {
                let mut e = 0.0;
                for &(i, m_i, f) in &self.anchors {
                    let d = [v[i][0] - f[0], v[i][1] - f[1]];
                    e += m_i * (d[0] * d[0] + d[1] * d[1]);
                    add(i, [2.0 * m_i * d[0], 2.0 * m_i * d[1]]);
                }
                e
            }
            Term::Line => {
                let mut e = 0.0;
                for edge in &self.edges {
                    let d = [v[edge.i][0] - v[edge.j][0], v[edge.i][1] - v[edge.j][1]];
                    let c = d[0] * edge.e[1] - d[1] * edge.e[0];
                    e += c * c;
                    let g = [2.0 * c * edge.e[1], -2.0 * c * edge.e[0]];
                    add(edge.i, g);
                    add(edge.j, [-g[0], -g[1]]);
                }
                e
            }
            Term::Smoothness => {
                let mut e = 0.0;
                for edge in &self.edges {
                    let mut d = [v[edge.i][0] - v[edge.j][0], v[edge.i][1] - v[edge.j][1]];
                    if self.smoothness == SmoothnessForm::Relative {
                        d[0] -= edge.rest[0];
                        d[1] -= edge.rest[1];
                    }
                    e += d[0] * d[0] + d[1] * d[1];
                    let g = [2.0 * d[0], 2.0 * d[1]];
                    add(edge.i, g);
                    add(edge.j, [-g[0], -g[1]]);
                }
                e
            }
            Term::Asymmetric => {
                // bounds are the rest positions of the boundary rows/columns
                let (w, h) = (self.w_m, self.h_m);
                let (left, right) = (0.5, w as f64 - 0.5);
                let (top, bottom) = (0.5, h as f64 - 0.5);
                let (inv_h, inv_w) = (1.0 / h as f64, 1.0 / w as f64);
                let mut e = 0.0;
                for n in 0..h {
                    let i = n * w;
                    let x = v[i][0];
                    if x > left {
                        e += inv_h * (x - left).powi(2);
                        add(i, [2.0 * inv_h * (x - left), 0.0]);
                    }
                    let i = n * w + w - 1;
                    let x = v[i][0];
                    if x < right {
                        e += inv_h * (x - right).powi(2);
                        add(i, [2.0 * inv_h * (x - right), 0.0]);
                    }
                }
                for m in 0..w {
                    let y = v[m][1];
                    if y > top {
                        e += inv_w * (y - top).powi(2);
                        add(m, [0.0, 2.0 * inv_w * (y - top)]);
                    }
                    let i = (h - 1) * w + m;
                    let y = v[i][1];
                    if y < bottom {
                        e += inv_w * (y - bottom).powi(2);
                        add(i, [0.0, 2.0 * inv_w * (y - bottom)]);
                    }
                }
                e
            }
        }
    }

    /// All terms and the weighted total; the gradient of the total is written
    /// to `grad` when given.
    pub fn evaluate(&self, v: &[[f64; 2]], mut grad: Option<&mut [[f64; 2]]>) -> EnergyTerms {
        if let Some(g) = grad.as_deref_mut() {
            g.fill([0.0, 0.0]);
        }
        let mut terms = EnergyTerms::default();
        for term in Term::ALL {
            let lambda = self.weights.of(term);
            let value = self.term(term, v, grad.as_deref_mut(), lambda);
            terms.set(term, value);
            terms.total += lambda * value;
        }
        terms
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::VertexMesh;

    fn identity_pair(w: usize, h: usize) -> MeshPair {
        let p = crate::projections::PanniniParams::new(0.5, 0.0).unwrap();
        MeshPair {
            m_b: VertexMesh::uniform(w, h),
            m_f: VertexMesh::uniform(w, h),
            params_b: p,
            params_f: p,
            clamped: vec![],
            cell_size: 1.0,
        }
    }

    #[test]
    fn baseline_values_on_rest_mesh() {
        let (w, h) = (9, 6);
        let pair = identity_pair(w, h);
        let seg = LabelMap::filled(w * 10, h * 10, 1);
        let problem = EnergyProblem::new(&pair, &seg, EnergyWeights::default(), SmoothnessForm::Absolute);
        let t = problem.evaluate(pair.m_b.vertices(), None);
        assert_eq!(t.conformality, 0.0);
        assert_eq!(t.line, 0.0);
        assert_eq!(t.asymmetric, 0.0);
        // every ordered neighbour pair contributes one squared unit length
        assert_eq!(t.smoothness, (2 * ((w - 1) * h + w * (h - 1))) as f64);
    }

    #[test]
    fn row_displacement_only_loads_column_edges() {
        let (w, h) = (7, 5);
        let pair = identity_pair(w, h);
        let problem = EnergyProblem::with_anchors(&pair.m_b, vec![], EnergyWeights::default(), SmoothnessForm::Absolute);
        let delta = 0.3;
        let mut v = pair.m_b.clone();
        let i = v.index(3, 2);
        v.vertices_mut()[i][0] += delta;
        // per undirected edge: row edges are parallel (0), the two column edges
        // give delta^2 each; ordered pairs count every edge twice
        let e = problem.term(Term::Line, v.vertices(), None, 1.0);
        assert!((e - 2.0 * (2.0 * delta * delta)).abs() < 1e-15);
    }

    #[test]
    fn translation_leaves_line_and_smoothness_unchanged() {
        let (w, h) = (8, 5);
        let pair = identity_pair(w, h);
        let problem = EnergyProblem::with_anchors(&pair.m_b, vec![], EnergyWeights::default(), SmoothnessForm::Absolute);
        let mut v = pair.m_b.clone();
        for (k, p) in v.vertices_mut().iter_mut().enumerate() {
            p[0] += 0.1 * (k as f64).sin();
            p[1] += 0.07 * (k as f64 * 1.3).cos();
        }
        let moved = v.translated(3.2, -1.7);
        for term in [Term::Line, Term::Smoothness] {
            let a = problem.term(term, v.vertices(), None, 1.0);
            let b = problem.term(term, moved.vertices(), None, 1.0);
            assert!((a - b).abs() < 1e-9 * a.max(1.0));
        }
    }

    #[test]
    fn boundary_term_is_zero_outside_the_lattice() {
        let (w, h) = (6, 4);
        let pair = identity_pair(w, h);
        let problem = EnergyProblem::with_anchors(&pair.m_b, vec![], EnergyWeights::default(), SmoothnessForm::Absolute);
        let mut v = pair.m_b.clone();
        for n in 0..h {
            v.vertices_mut()[n * w][0] = -0.5;
            v.vertices_mut()[n * w + w - 1][0] = w as f64 + 0.2;
        }
        for m in 0..w {
            v.vertices_mut()[m][1] = 0.0;
            v.vertices_mut()[(h - 1) * w + m][1] = h as f64;
        }
        assert_eq!(problem.term(Term::Asymmetric, v.vertices(), None, 1.0), 0.0);
        // pulling the left column inwards is penalized with weight 1/h
        let mut inward = pair.m_b.clone();
        inward.vertices_mut()[0][0] = 1.5;
        let e = problem.term(Term::Asymmetric, inward.vertices(), None, 1.0);
        assert!((e - 1.0 / h as f64).abs() < 1e-15);
    }

    #[test]
    fn relative_smoothness_vanishes_at_rest() {
        let pair = identity_pair(5, 5);
        let problem = EnergyProblem::with_anchors(&pair.m_b, vec![], EnergyWeights::default(), SmoothnessForm::Relative);
        assert_eq!(problem.term(Term::Smoothness, pair.m_b.vertices(), None, 1.0), 0.0);
    }

    #[test]
    fn vertex_membership_follows_labels() {
        let (w, h) = (10, 6);
        let pair = identity_pair(w, h);
        // object covers the left half of a 100 x 60 viewport
        let seg = LabelMap::from_fn(100, 60, |x, _| (x < 50) as u32);
        let problem = EnergyProblem::new(&pair, &seg, EnergyWeights::default(), SmoothnessForm::Absolute);
        let anchored: Vec<usize> = problem.anchored_vertices().collect();
        assert_eq!(anchored.len(), 5 * h);
        assert!(anchored.iter().all(|&i| i % w < 5));
    }
}
