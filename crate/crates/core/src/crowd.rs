//! Crowds of rigid disks: contact constraints, the admissible-velocity
//! projection and explicit bounded contact multipliers.
//!
//! Disk `i` sits at `q_i` in the plane; positions are stacked into
//! `q = (q_1, ..., q_N)`. Pair `(i, j)` with `i < j` gives the constraint
//! `D_ij(q) = |q_i - q_j| - 2r >= 0` with gradient `G_ij`, which is
//! `-e_ij` in block `i`, `e_ij` in block `j` and zero elsewhere, where
//! `e_ij = (q_j - q_i) / |q_j - q_i|`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::cone::project_onto_cone;
use crate::constraint::ConstraintFamily;
use crate::error::{Error, Result};
use crate::hull::{convex_hull, interior_angles};
use crate::nnls::nnls;

/// Pairs with `D_ij <= CONTACT_TOL` are in contact.
pub const CONTACT_TOL: f64 = 1e-9;

/// Residual (relative to `|F|`) above which a decomposition is rejected.
pub const DECOMPOSITION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct CrowdConfiguration {
    pub radius: f64,
    pub q: DVector<f64>,
}

impl CrowdConfiguration {
    pub fn new(radius: f64, positions: &[[f64; 2]]) -> Self {
        let q = DVector::from_iterator(2 * positions.len(), positions.iter().flatten().copied());
        Self { radius, q }
    }

    pub fn from_stacked(radius: f64, q: DVector<f64>) -> Result<Self> {
        if q.len() % 2 != 0 {
            return Err(Error::Parameter(format!(
                "stacked crowd vector has odd length {}",
                q.len()
            )));
        }
        Ok(Self { radius, q })
    }

    pub fn len(&self) -> usize {
        self.q.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn position(&self, i: usize) -> [f64; 2] {
        [self.q[2 * i], self.q[2 * i + 1]]
    }

    pub fn positions(&self) -> Vec<[f64; 2]> {
        (0..self.len()).map(|i| self.position(i)).collect()
    }

    /// `D_ij = |q_i - q_j| - 2r`.
    pub fn signed_distance(&self, i: usize, j: usize) -> f64 {
        pair_distance(&self.q, i, j) - 2.0 * self.radius
    }

    pub fn is_feasible(&self, tol: f64) -> bool {
        let n = self.len();
        (0..n).all(|i| (i + 1..n).all(|j| self.signed_distance(i, j) >= -tol))
    }
}

fn pair_distance(q: &DVector<f64>, i: usize, j: usize) -> f64 {
    (q[2 * j] - q[2 * i]).hypot(q[2 * j + 1] - q[2 * i + 1])
}

/// Index of pair `(i, j)`, `i < j`, in the lexicographic pair ordering.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// One constraint `D_ij` per pair `i < j`, time independent.
#[derive(Debug, Clone)]
pub struct CrowdFamily {
    n: usize,
    radius: f64,
    pairs: Vec<(usize, usize)>,
}

impl CrowdFamily {
    pub fn new(n: usize, radius: f64) -> Self {
        let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Self { n, radius, pairs }
    }

    pub fn disks(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn pair(&self, k: usize) -> (usize, usize) {
        self.pairs[k]
    }
}

pub fn crowd_family(config: &CrowdConfiguration) -> CrowdFamily {
    CrowdFamily::new(config.len(), config.radius)
}

impl ConstraintFamily for CrowdFamily {
    fn len(&self) -> usize {
        self.pairs.len()
    }
    fn dim(&self) -> usize {
        2 * self.n
    }
    fn value(&self, k: usize, _t: f64, q: &DVector<f64>) -> f64 {
        let (i, j) = self.pairs[k];
        pair_distance(q, i, j) - 2.0 * self.radius
    }
    fn gradient(&self, k: usize, _t: f64, q: &DVector<f64>) -> DVector<f64> {
        let (i, j) = self.pairs[k];
        let mut g = DVector::zeros(2 * self.n);
        let e = unit(q, i, j);
        g[2 * i] = -e[0];
        g[2 * i + 1] = -e[1];
        g[2 * j] = e[0];
        g[2 * j + 1] = e[1];
        g
    }
    fn time_derivative(&self, _k: usize, _t: f64, _q: &DVector<f64>) -> f64 {
        0.0
    }
    fn in_domain(&self, k: usize, _t: f64, q: &DVector<f64>) -> bool {
        let (i, j) = self.pairs[k];
        pair_distance(q, i, j) > self.radius
    }
    fn name(&self, k: usize) -> String {
        let (i, j) = self.pairs[k];
        format!("D({},{})", i + 1, j + 1)
    }
}

fn unit(q: &DVector<f64>, i: usize, j: usize) -> Vector2<f64> {
    let v = Vector2::new(q[2 * j] - q[2 * i], q[2 * j + 1] - q[2 * i + 1]);
    v / v.norm()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contact {
    pub i: usize,
    pub j: usize,
    /// `e_ij = (q_j - q_i) / |q_j - q_i|`.
    pub e: Vector2<f64>,
    /// Index of `D_ij` in [`CrowdFamily`].
    pub pair: usize,
}

impl Contact {
    /// Contribution of `G_ij` to the block of `node`: `-e_ij` at `i`, `e_ij` at `j`.
    pub fn direction_at(&self, node: usize) -> Vector2<f64> {
        if node == self.i {
            -self.e
        } else {
            self.e
        }
    }

    pub fn other(&self, node: usize) -> usize {
        if node == self.i {
            self.j
        } else {
            self.i
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactGraph {
    pub n: usize,
    pub contacts: Vec<Contact>,
}

impl ContactGraph {
    /// Contacts are the pairs with `D_ij <= tol`.
    pub fn build(config: &CrowdConfiguration, tol: f64) -> Self {
        let n = config.len();
        let mut contacts = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if config.signed_distance(i, j) <= tol {
                    contacts.push(Contact {
                        i,
                        j,
                        e: unit(&config.q, i, j),
                        pair: pair_index(n, i, j),
                    });
                }
            }
        }
        Self { n, contacts }
    }

    pub fn len(&self) -> usize {
        self.contacts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contacts.is_empty()
    }

    /// `G_ij` for contact `k`.
    pub fn gradient(&self, k: usize) -> DVector<f64> {
        let c = &self.contacts[k];
        let mut g = DVector::zeros(2 * self.n);
        g[2 * c.i] = -c.e[0];
        g[2 * c.i + 1] = -c.e[1];
        g[2 * c.j] = c.e[0];
        g[2 * c.j + 1] = c.e[1];
        g
    }

    pub fn degree(&self, node: usize) -> usize {
        self.contacts.iter().filter(|c| c.i == node || c.j == node).count()
    }

    /// Connected components with at least one contact, each sorted, in
    /// order of their smallest disk index.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut label: Vec<usize> = (0..self.n).collect();
        fn find(label: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while label[r] != r {
                r = label[r];
            }
            label[x] = r;
            r
        }
        for c in &self.contacts {
            let (a, b) = (find(&mut label, c.i), find(&mut label, c.j));
            if a != b {
                label[a.max(b)] = a.min(b);
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut root_group: Vec<Option<usize>> = vec![None; self.n];
        for node in 0..self.n {
            if self.degree(node) == 0 {
                continue;
            }
            let r = find(&mut label, node);
            match root_group[r] {
                Some(g) => groups[g].push(node),
                None => {
                    root_group[r] = Some(groups.len());
                    groups.push(vec![node]);
                }
            }
        }
        groups
    }

    /// `sum_k lambda_k G_k`.
    pub fn combine(&self, lambda: &[f64]) -> DVector<f64> {
        let mut out = DVector::zeros(2 * self.n);
        for (c, &l) in self.contacts.iter().zip(lambda) {
            out[2 * c.i] -= l * c.e[0];
            out[2 * c.i + 1] -= l * c.e[1];
            out[2 * c.j] += l * c.e[0];
            out[2 * c.j + 1] += l * c.e[1];
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoreauVelocity {
    /// Projection of the spontaneous velocity onto the admissible cone.
    pub actual: DVector<f64>,
    /// One per contact, with `U - actual = -sum lambda_k G_k`.
    pub multipliers: Vec<f64>,
    pub contacts: ContactGraph,
}

/// Closest velocity to `u` that does not decrease any contact distance.
pub fn moreau_velocity(config: &CrowdConfiguration, u: &DVector<f64>) -> Result<MoreauVelocity> {
    if u.len() != config.q.len() {
        return Err(Error::Parameter(format!(
            "velocity has length {}, expected {}",
            u.len(),
            config.q.len()
        )));
    }
    let graph = ContactGraph::build(config, CONTACT_TOL);
    let generators: Vec<DVector<f64>> = (0..graph.len()).map(|k| -graph.gradient(k)).collect();
    let dec = project_onto_cone(&generators, u)?;
    Ok(MoreauVelocity {
        actual: dec.polar_part,
        multipliers: dec.coefficients,
        contacts: graph,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrowdConstants {
    /// Inverse triangle constant `3 sqrt(2) N a^N`.
    pub gamma: f64,
    /// Prox-regularity of the feasible set, `r / (6N) a^{-N}`.
    pub eta: f64,
    /// `3 / sin(2 pi / N)`.
    pub a: f64,
}

pub fn crowd_constants(n: usize, radius: f64) -> Result<CrowdConstants> {
    if n < 3 {
        return Err(Error::Parameter(format!("crowd constants need N >= 3, got {n}")));
    }
    if !(radius > 0.0) {
        return Err(Error::Parameter(format!("radius must be positive, got {radius}")));
    }
    let nf = n as f64;
    let s = (2.0 * PI / nf).sin();
    let a = 3.0 / s;
    let exp = i32::try_from(n).map_err(|_| Error::Parameter(format!("N = {n} too large")))?;
    Ok(CrowdConstants {
        gamma: 3.0 * 2f64.sqrt() * nf * a.powi(exp),
        eta: radius / (6.0 * nf) * (s / 3.0).powi(exp),
        a,
    })
}

/// Per-multiplier bound factor `a^N`, so that `lambda_ij <= factor * |F|`.
/// For fewer than three disks every contact is eliminated as a single
/// contact, which gives the factor 1.
pub fn multiplier_bound_factor(n: usize) -> f64 {
    if n < 3 {
        return 1.0;
    }
    let a = 3.0 / (2.0 * PI / n as f64).sin();
    a.powi(n as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EliminationCase {
    /// A disk with one remaining contact.
    Single,
    /// Hull vertex with two contacts; the multipliers are unique.
    TwoNeighbours,
    /// Hull vertex with three contacts; one-parameter family of solutions.
    ThreeNeighbours,
}

impl EliminationCase {
    pub fn tag(&self) -> &'static str {
        match self {
            EliminationCase::Single => "1",
            EliminationCase::TwoNeighbours => "2a",
            EliminationCase::ThreeNeighbours => "2b",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EliminationStep {
    pub node: usize,
    pub case: EliminationCase,
    /// Contact indices solved in this step.
    pub contacts: Vec<usize>,
    /// Kernel parameter used in the three-contact case.
    pub kernel_t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierCertificate {
    pub contacts: ContactGraph,
    pub lambda: Vec<f64>,
    /// `|sum lambda_k G_k - F|`.
    pub residual: f64,
    /// `a^N |F|`.
    pub bound: f64,
    pub trace: Vec<EliminationStep>,
    /// Contact tolerance actually used (widened once on near-degenerate hulls).
    pub contact_tol: f64,
}

impl MultiplierCertificate {
    pub fn max_multiplier(&self) -> f64 {
        self.lambda.iter().copied().fold(0.0, f64::max)
    }
}

/// Explicit nonnegative multipliers with `sum lambda_ij G_ij = F`.
///
/// Disks with a single contact are peeled off first, pushing the
/// transmitted force onto their neighbour. When none is left, the hull
/// vertex of smallest interior angle of the remaining disks has two or
/// three contacts; its local 2x2 system is solved directly, or through a
/// particular solution plus a kernel term.
pub fn eliminate_multipliers(
    config: &CrowdConfiguration,
    f: &DVector<f64>,
) -> Result<MultiplierCertificate> {
    if f.len() != config.q.len() {
        return Err(Error::Parameter(format!(
            "force has length {}, expected {}",
            f.len(),
            config.q.len()
        )));
    }
    match eliminate_with_tol(config, f, CONTACT_TOL) {
        Err(Attempt::Crowded(_)) => match eliminate_with_tol(config, f, 10.0 * CONTACT_TOL) {
            Err(Attempt::Crowded(node)) => Err(Error::DegenerateHull(format!(
                "hull vertex {node} keeps more than 3 contacts after widening the contact tolerance"
            ))),
            Err(Attempt::Failed(e)) => Err(e),
            Ok(c) => Ok(c),
        },
        Err(Attempt::Failed(e)) => Err(e),
        Ok(c) => Ok(c),
    }
}

enum Attempt {
    Crowded(usize),
    Failed(Error),
}

impl From<Error> for Attempt {
    fn from(e: Error) -> Self {
        Attempt::Failed(e)
    }
}

fn eliminate_with_tol(
    config: &CrowdConfiguration,
    f: &DVector<f64>,
    tol: f64,
) -> std::result::Result<MultiplierCertificate, Attempt> {
    let n = config.len();
    let graph = ContactGraph::build(config, tol);
    let m = graph.len();
    let f_norm = f.norm();
    let positions = config.positions();
    let mut force: Vec<Vector2<f64>> = (0..n).map(|i| Vector2::new(f[2 * i], f[2 * i + 1])).collect();
    let mut lambda = vec![0.0; m];
    let mut edge_alive = vec![true; m];
    let mut trace = Vec::new();

    let alive_edges = |node: usize, edge_alive: &[bool]| -> Vec<usize> {
        (0..m)
            .filter(|&k| edge_alive[k] && (graph.contacts[k].i == node || graph.contacts[k].j == node))
            .collect()
    };

    for component in graph.components() {
        let mut alive: Vec<usize> = component;
        while alive.len() > 1 {
            // Single contacts first.
            let single = alive
                .iter()
                .copied()
                .find(|&v| alive_edges(v, &edge_alive).len() == 1);
            if let Some(v) = single {
                let k = alive_edges(v, &edge_alive)[0];
                let c = graph.contacts[k];
                let l = force[v].dot(&c.direction_at(v)).max(0.0);
                lambda[k] = l;
                let w = c.other(v);
                force[w] -= c.direction_at(w) * l;
                force[v] = Vector2::zeros();
                edge_alive[k] = false;
                trace.push(EliminationStep {
                    node: v,
                    case: EliminationCase::Single,
                    contacts: vec![k],
                    kernel_t: None,
                });
                alive.retain(|&x| x != v);
                continue;
            }
            // Disks whose contacts are all solved drop out.
            let before = alive.len();
            alive.retain(|&v| !alive_edges(v, &edge_alive).is_empty());
            if alive.len() != before {
                continue;
            }

            let pts: Vec<[f64; 2]> = alive.iter().map(|&v| positions[v]).collect();
            let hull = convex_hull(&pts);
            if hull.len() < 3 {
                return Err(Error::DegenerateHull(format!(
                    "{} remaining disks without single contacts span no polygon",
                    alive.len()
                ))
                .into());
            }
            let angles = interior_angles(&pts, &hull);
            let mut best = 0;
            for h in 1..hull.len() {
                let (a, b) = (angles[h], angles[best]);
                if a < b - 1e-12 || (a <= b + 1e-12 && alive[hull[h]] < alive[hull[best]]) {
                    best = h;
                }
            }
            let v = alive[hull[best]];
            let edges = alive_edges(v, &edge_alive);
            match edges.len() {
                2 => {
                    let d0 = graph.contacts[edges[0]].direction_at(v);
                    let d1 = graph.contacts[edges[1]].direction_at(v);
                    let sol = solve2(d0, d1, force[v]).ok_or_else(|| {
                        Error::DegenerateHull(format!("parallel contacts at disk {v}"))
                    })?;
                    for (&k, l) in edges.iter().zip([sol[0], sol[1]]) {
                        let l = l.max(0.0);
                        lambda[k] = l;
                        let c = graph.contacts[k];
                        let w = c.other(v);
                        force[w] -= c.direction_at(w) * l;
                    }
                    trace.push(EliminationStep {
                        node: v,
                        case: EliminationCase::TwoNeighbours,
                        contacts: edges.clone(),
                        kernel_t: None,
                    });
                }
                3 => {
                    let (ls, t) = three_contact_step(&graph, &edge_alive, &force, &alive, v, &edges)?;
                    for (&k, l) in edges.iter().zip(ls) {
                        lambda[k] = l;
                        let c = graph.contacts[k];
                        let w = c.other(v);
                        force[w] -= c.direction_at(w) * l;
                    }
                    trace.push(EliminationStep {
                        node: v,
                        case: EliminationCase::ThreeNeighbours,
                        contacts: edges.clone(),
                        kernel_t: Some(t),
                    });
                }
                _ => return Err(Attempt::Crowded(v)),
            }
            force[v] = Vector2::zeros();
            for &k in &edges {
                edge_alive[k] = false;
            }
            alive.retain(|&x| x != v);
        }
    }

    let residual = (graph.combine(&lambda) - f).norm();
    if residual > DECOMPOSITION_TOL * f_norm.max(f64::MIN_POSITIVE) && residual > 0.0 {
        return Err(Error::InfeasibleDecomposition {
            residual,
            norm: f_norm,
        }
        .into());
    }
    Ok(MultiplierCertificate {
        contacts: graph,
        lambda,
        residual,
        bound: multiplier_bound_factor(n) * f_norm,
        trace,
        contact_tol: tol,
    })
}

/// Solves `x0 d0 + x1 d1 = rhs`.
fn solve2(d0: Vector2<f64>, d1: Vector2<f64>, rhs: Vector2<f64>) -> Option<Vector2<f64>> {
    Matrix2::from_columns(&[d0, d1]).try_inverse().map(|inv| inv * rhs)
}

fn cross(a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Three contacts at hull vertex `v`: returns multipliers in the order of
/// `edges` and the kernel parameter.
fn three_contact_step(
    graph: &ContactGraph,
    edge_alive: &[bool],
    force: &[Vector2<f64>],
    alive: &[usize],
    v: usize,
    edges: &[usize],
) -> Result<([f64; 3], f64)> {
    let dirs: Vec<Vector2<f64>> = edges.iter().map(|&k| graph.contacts[k].direction_at(v)).collect();
    // The middle direction lies inside the cone of the other two.
    let mut order = [0usize, 1, 2];
    let mid = (0..3)
        .find(|&m| {
            let (a, b) = ((m + 1) % 3, (m + 2) % 3);
            let (ca, cb) = (cross(dirs[a], dirs[m]), cross(dirs[m], dirs[b]));
            ca * cb > 0.0 && cross(dirs[a], dirs[b]) * ca > 0.0
        })
        .ok_or_else(|| Error::DegenerateHull(format!("contacts at disk {v} do not fit in a half-plane")))?;
    order[0] = (mid + 1) % 3;
    order[1] = mid;
    order[2] = (mid + 2) % 3;
    let (dj, dk, dl) = (dirs[order[0]], dirs[order[1]], dirs[order[2]]);

    let part = solve2(dj, dl, force[v])
        .ok_or_else(|| Error::DegenerateHull(format!("parallel outer contacts at disk {v}")))?;
    let mut kernel = [cross(dk, dl), cross(dl, dj), cross(dj, dk)];
    if kernel[1] < 0.0 {
        kernel.iter_mut().for_each(|x| *x = -*x);
    }
    let t_max = {
        let mut t = f64::INFINITY;
        if kernel[0] < 0.0 {
            t = t.min(part[0] / -kernel[0]);
        }
        if kernel[2] < 0.0 {
            t = t.min(part[1] / -kernel[2]);
        }
        t.max(0.0)
    };
    let at = |t: f64| {
        [
            (part[0] + t * kernel[0]).max(0.0),
            (t * kernel[1]).max(0.0),
            (part[1] + t * kernel[2]).max(0.0),
        ]
    };

    // t = 0 unless it leaves the rest of the cluster without a nonnegative
    // solution; then take t from a nonnegative solution of the whole
    // remaining system.
    let mut t = 0.0;
    if !reduced_feasible(graph, edge_alive, force, alive, v, edges, &order, &at(0.0)) {
        let rem = remaining_nnls(graph, edge_alive, force, alive)?;
        let k_mid = edges[order[1]];
        if let Some(pos) = rem.0.iter().position(|&k| k == k_mid) {
            t = (rem.1[pos] / kernel[1]).clamp(0.0, t_max);
        }
    }
    let l = at(t);
    let mut out = [0.0; 3];
    for (slot, &o) in order.iter().enumerate() {
        out[o] = l[slot];
    }
    Ok((out, t))
}

#[allow(clippy::too_many_arguments)]
fn reduced_feasible(
    graph: &ContactGraph,
    edge_alive: &[bool],
    force: &[Vector2<f64>],
    alive: &[usize],
    v: usize,
    edges: &[usize],
    order: &[usize; 3],
    local: &[f64; 3],
) -> bool {
    let mut f2 = force.to_vec();
    let mut e2 = edge_alive.to_vec();
    for (slot, &o) in order.iter().enumerate() {
        let c = graph.contacts[edges[o]];
        let w = c.other(v);
        f2[w] -= c.direction_at(w) * local[slot];
        e2[edges[o]] = false;
    }
    let rest: Vec<usize> = alive.iter().copied().filter(|&x| x != v).collect();
    let scale: f64 = f2.iter().map(|x| x.norm_squared()).sum::<f64>().sqrt();
    match remaining_nnls(graph, &e2, &f2, &rest) {
        Ok((_, _, res)) => res <= 1e-9 * (1.0 + scale),
        Err(_) => false,
    }
}

/// Nonnegative least squares over the alive contacts of `nodes`; returns
/// the contact indices, their multipliers and the residual norm.
fn remaining_nnls(
    graph: &ContactGraph,
    edge_alive: &[bool],
    force: &[Vector2<f64>],
    nodes: &[usize],
) -> Result<(Vec<usize>, Vec<f64>, f64)> {
    let ks: Vec<usize> = (0..graph.len())
        .filter(|&k| {
            edge_alive[k] && nodes.contains(&graph.contacts[k].i) && nodes.contains(&graph.contacts[k].j)
        })
        .collect();
    let row = |node: usize| nodes.iter().position(|&x| x == node).unwrap();
    let mut a = DMatrix::zeros(2 * nodes.len(), ks.len());
    for (col, &k) in ks.iter().enumerate() {
        let c = graph.contacts[k];
        for node in [c.i, c.j] {
            let d = c.direction_at(node);
            let r = row(node);
            a[(2 * r, col)] = d[0];
            a[(2 * r + 1, col)] = d[1];
        }
    }
    let b = DVector::from_iterator(2 * nodes.len(), nodes.iter().flat_map(|&v| [force[v][0], force[v][1]]));
    let sol = nnls(&a, &b, 100 * ks.len().max(1), &[])?;
    Ok((ks, sol.x.iter().copied().collect(), sol.residual.norm()))
}

/// Generator of the kernel of the three-contact system in the reference
/// frame where the contact directions are `(-1, 0)`, `(-cos phi, -sin phi)`
/// and `(cos theta, sin theta)`: `(sin(phi - theta), sin theta, sin phi)`.
pub fn kernel_direction(theta: f64, phi: f64) -> [f64; 3] {
    [(phi - theta).sin(), theta.sin(), phi.sin()]
}

/// Contact directions of the reference three-contact frame, in the order
/// matching [`kernel_direction`].
pub fn three_contact_frame(theta: f64, phi: f64) -> [[f64; 2]; 3] {
    [[-1.0, 0.0], [-phi.cos(), -phi.sin()], [theta.cos(), theta.sin()]]
}

/// Neighbour bound `n_v` and growth factor `b` for disks of unequal radii.
pub fn polydisperse_bound(radii: &[f64]) -> Result<(usize, f64)> {
    if radii.is_empty() {
        return Err(Error::Parameter("no radii given".into()));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0)) {
        return Err(Error::Parameter(format!("radius {r} is not positive")));
    }
    let n = radii.len();
    if n < 3 {
        return Err(Error::Parameter(format!("need at least 3 disks, got {n}")));
    }
    let r_min = radii.iter().copied().fold(f64::INFINITY, f64::min);
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    if r_min / r_max < 1e-6 {
        return Err(Error::Parameter(format!(
            "radius ratio {:e} below 1e-6",
            r_min / r_max
        )));
    }
    // Guard against arcsin(1/2) landing a hair above pi/6.
    let n_v = (PI / (r_min / (r_max + r_min)).asin() + 1e-9).floor() as usize;
    let s = (PI / (n_v as f64 + 1.0)).sin().min((2.0 * PI / n as f64).sin());
    Ok((n_v, 2.0 * (n_v as f64).sqrt() / s))
}
