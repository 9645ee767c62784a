//! Galerkin assembly of the restricted fractional Laplacian on P1 hat
//! functions, together with the Hardy-weight and mass matrices.
//!
//! The stiffness matrix realizes
//! `a(u, v) = (C_{1,s}/2) ∬_{R×R} (u(x)-u(y))(v(x)-v(y)) / |x-y|^{1+2s}`
//! for functions vanishing outside `(-R, R)`. The double integral is split
//! into element pairs inside the domain plus an exterior tail that reduces to
//! a weighted mass term with weight `((R-x)^{-2s} + (R+x)^{-2s}) / (2s)`.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use faer::Mat;

use crate::constants::{normalization_constant, HardyParams};
use crate::error::{Error, Result};
use crate::linalg::{generalized_eigenvalues_tridiag, Tridiag};
use crate::mesh::Mesh1D;
use crate::quadrature::{geometric_unit_rule, graded_toward_external};

/// Assembled quadratic forms for one `(mesh, s)` configuration.
///
/// `stiffness` is restricted to interior nodes; the tridiagonal matrices
/// cover all nodes (use [`Tridiag::interior`] for the solver subspace).
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub mesh: Arc<Mesh1D>,
    pub s: f64,
    pub stiffness: Mat<f64>,
    pub hardy: Tridiag,
    pub mass: Tridiag,
    pub lumped_mass: Vec<f64>,
    /// Regularized Hardy matrices for the levels requested at assembly.
    pub hardy_levels: Vec<(u64, Tridiag)>,
    origin_rules: Vec<Vec<(f64, f64, f64)>>,
}

/// Per-element quadrature rule for an integrand with a weak singularity at
/// `sing`, which is either an endpoint of `[a, b]` or outside it.
///
/// At an endpoint the substitution `|x - sing| = h t^{1/(1-2s)}` turns a
/// `|x - sing|^{-2s}` factor into a bounded one.
///
/// Returns `(x, weight, |x - sing|)`; the distance is carried separately
/// because `x` itself rounds onto `sing` deep in the geometric grading.
fn element_rule(a: f64, b: f64, sing: f64, s: f64) -> Vec<(f64, f64, f64)> {
    let h = b - a;
    if sing == a || sing == b {
        let p = 1.0 / (1.0 - 2.0 * s);
        let dir = if sing == a { 1.0 } else { -1.0 };
        geometric_unit_rule(12)
            .iter()
            .map(|&(t, w)| {
                let d = h * t.powf(p);
                (sing + dir * d, w * h * p * t.powf(p - 1.0), d)
            })
            .collect()
    } else {
        let mut out = Vec::new();
        graded_toward_external(a, b, sing, 10, &mut out);
        out.into_iter()
            .map(|(x, w)| (x, w, (x - sing).abs()))
            .collect()
    }
}

/// Local 2x2 weighted mass `[LL, LR, RR]` on element `[a, b]`.
/// `weight` receives the distance to the rule's singular point.
fn local_weighted_mass(
    a: f64,
    b: f64,
    rule: &[(f64, f64, f64)],
    weight: impl Fn(f64) -> f64,
) -> [f64; 3] {
    let h = b - a;
    let mut out = [0.0; 3];
    for &(x, w, d) in rule {
        let r = ((x - a) / h).clamp(0.0, 1.0);
        let l = 1.0 - r;
        let ww = w * weight(d);
        out[0] += ww * l * l;
        out[1] += ww * l * r;
        out[2] += ww * r * r;
    }
    out
}

fn scatter_tridiag(t: &mut Tridiag, e: usize, local: [f64; 3]) {
    t.diag[e] += local[0];
    t.off[e] += local[1];
    t.diag[e + 1] += local[2];
}

/// Gauss order for a separated rectangle given distance / size.
fn separated_order(ratio: f64) -> usize {
    if ratio >= 16.0 {
        4
    } else if ratio >= 4.0 {
        6
    } else {
        10
    }
}

struct PairGeometry {
    x0: f64,
    hx: f64,
    y0: f64,
    hy: f64,
    sigma: f64,
}

/// Accumulates `∬ c cᵀ (y-x)^{-sigma}` over `[xa,xb]×[ya,yb]` with
/// `c = (φL(x), φR(x), -φL(y), -φR(y))`, subdividing until each rectangle is
/// separated by at least its size.
fn separated_block(g: &PairGeometry, xa: f64, xb: f64, ya: f64, yb: f64, acc: &mut [f64; 10]) {
    let dist = ya - xb;
    let wx = xb - xa;
    let wy = yb - ya;
    let size = wx.max(wy);
    if dist < size {
        if wx >= wy {
            let xm = 0.5 * (xa + xb);
            separated_block(g, xa, xm, ya, yb, acc);
            separated_block(g, xm, xb, ya, yb, acc);
        } else {
            let ym = 0.5 * (ya + yb);
            separated_block(g, xa, xb, ya, ym, acc);
            separated_block(g, xa, xb, ym, yb, acc);
        }
        return;
    }
    let rule = crate::quadrature::gauss(separated_order(dist / size));
    let (hx2, mx) = (0.5 * wx, 0.5 * (xa + xb));
    let (hy2, my) = (0.5 * wy, 0.5 * (ya + yb));
    for (tx, wxq) in rule.nodes.iter().zip(&rule.weights) {
        let x = mx + hx2 * tx;
        let rx = (x - g.x0) / g.hx;
        let c0 = 1.0 - rx;
        let c1 = rx;
        for (ty, wyq) in rule.nodes.iter().zip(&rule.weights) {
            let y = my + hy2 * ty;
            let ry = (y - g.y0) / g.hy;
            let c2 = -(1.0 - ry);
            let c3 = -ry;
            let k = wxq * wyq * hx2 * hy2 * (y - x).powf(-g.sigma);
            acc[0] += k * c0 * c0;
            acc[1] += k * c0 * c1;
            acc[2] += k * c0 * c2;
            acc[3] += k * c0 * c3;
            acc[4] += k * c1 * c1;
            acc[5] += k * c1 * c2;
            acc[6] += k * c1 * c3;
            acc[7] += k * c2 * c2;
            acc[8] += k * c2 * c3;
            acc[9] += k * c3 * c3;
        }
    }
}

/// `∬_{T_e × T_{e+1}} c cᵀ (y-x)^{-sigma}` for two cells sharing a node, by
/// the Duffy splitting of the rectangle along its diagonal. Returns the
/// upper triangle of the 3x3 block in the order (00, 01, 02, 11, 12, 22).
fn adjacent_block(h1: f64, h2: f64, s: f64) -> [f64; 6] {
    let sigma = 1.0 + 2.0 * s;
    let mut acc = [0.0; 6];
    let push = |c: [f64; 3], k: f64, acc: &mut [f64; 6]| {
        acc[0] += k * c[0] * c[0];
        acc[1] += k * c[0] * c[1];
        acc[2] += k * c[0] * c[2];
        acc[3] += k * c[1] * c[1];
        acc[4] += k * c[1] * c[2];
        acc[5] += k * c[2] * c[2];
    };
    let mut rule = Vec::new();
    graded_toward_external(0.0, 1.0, -h1 / h2, 16, &mut rule);
    for &(v, w) in &rule {
        push([1.0, v - 1.0, -v], w * (h1 + h2 * v).powf(-sigma), &mut acc);
    }
    rule.clear();
    graded_toward_external(0.0, 1.0, -h2 / h1, 16, &mut rule);
    for &(v, w) in &rule {
        push([v, 1.0 - v, -1.0], w * (h1 * v + h2).powf(-sigma), &mut acc);
    }
    let scale = h1 * h2 / (3.0 - 2.0 * s);
    acc.iter_mut().for_each(|a| *a *= scale);
    acc
}

/// Assembles stiffness, Hardy, regularized Hardy and mass matrices.
///
/// Requires `s ∈ (0, 1/2)` so that `N = 1 > 2s`.
pub fn assemble(mesh: Arc<Mesh1D>, s: f64, reg_levels: &[u64]) -> Result<OperatorSet> {
    if !(s > 0.0 && s < 0.5) {
        return Err(Error::InvalidParameter("N>2s violated in 1-D".into()));
    }
    let params = HardyParams {
        dim: 1,
        s,
        lambda: 0.0,
        gamma: 1.0,
    };
    let c_ns = normalization_constant(&params)?;
    let nn = mesh.node_count();
    let ne = mesh.cells();
    let r = mesh.radius;
    let x = &mesh.nodes;
    let sigma = 1.0 + 2.0 * s;

    // full-node accumulation of the Gagliardo form
    let mut full = vec![0.0; nn * nn];
    let idx = |i: usize, j: usize| i * nn + j;

    // same-cell terms: (u')² ∬ |x-y|^{1-2s}
    for e in 0..ne {
        let h = mesh.cell_width(e);
        let c = 2.0 * h.powf(1.0 - 2.0 * s) / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s));
        full[idx(e, e)] += c;
        full[idx(e + 1, e + 1)] += c;
        full[idx(e, e + 1)] -= c;
        full[idx(e + 1, e)] -= c;
    }
    // neighbouring cells, counted twice for the (e,f) and (f,e) orderings
    for e in 0..ne - 1 {
        let b = adjacent_block(mesh.cell_width(e), mesh.cell_width(e + 1), s);
        let nodes = [e, e + 1, e + 2];
        let mut k = 0;
        for i in 0..3 {
            for j in i..3 {
                let v = 2.0 * b[k];
                full[idx(nodes[i], nodes[j])] += v;
                if i != j {
                    full[idx(nodes[j], nodes[i])] += v;
                }
                k += 1;
            }
        }
    }
    // separated cells
    let pairs = [
        (0, 0),
        (0, 1),
        (0, 2),
        (0, 3),
        (1, 1),
        (1, 2),
        (1, 3),
        (2, 2),
        (2, 3),
        (3, 3),
    ];
    for e in 0..ne {
        for f in e + 2..ne {
            let g = PairGeometry {
                x0: x[e],
                hx: mesh.cell_width(e),
                y0: x[f],
                hy: mesh.cell_width(f),
                sigma,
            };
            let mut acc = [0.0; 10];
            separated_block(&g, x[e], x[e + 1], x[f], x[f + 1], &mut acc);
            let nodes = [e, e + 1, f, f + 1];
            for (k, &(i, j)) in pairs.iter().enumerate() {
                let v = 2.0 * acc[k];
                full[idx(nodes[i], nodes[j])] += v;
                if i != j {
                    full[idx(nodes[j], nodes[i])] += v;
                }
            }
        }
    }
    // exterior tail: 2 ∫ u v κ with κ = ((R-x)^{-2s} + (R+x)^{-2s}) / (2s)
    for e in 0..ne {
        let (a, b) = (x[e], x[e + 1]);
        let right = element_rule(a, b, r, s);
        let left = element_rule(a, b, -r, s);
        let mr = local_weighted_mass(a, b, &right, |d| d.powf(-2.0 * s));
        let ml = local_weighted_mass(a, b, &left, |d| d.powf(-2.0 * s));
        let f = 2.0 / (2.0 * s);
        full[idx(e, e)] += f * (mr[0] + ml[0]);
        full[idx(e, e + 1)] += f * (mr[1] + ml[1]);
        full[idx(e + 1, e)] += f * (mr[1] + ml[1]);
        full[idx(e + 1, e + 1)] += f * (mr[2] + ml[2]);
    }

    let ni = nn - 2;
    let scale = 0.5 * c_ns;
    let mut stiffness = Mat::zeros(ni, ni);
    for i in 0..ni {
        for j in 0..ni {
            stiffness[(i, j)] = scale * 0.5 * (full[idx(i + 1, j + 1)] + full[idx(j + 1, i + 1)]);
        }
    }

    // Hardy weight, mass
    let origin_rules: Vec<Vec<(f64, f64, f64)>> = (0..ne)
        .map(|e| element_rule(x[e], x[e + 1], 0.0, s))
        .collect();
    let mut hardy = Tridiag::zeros(nn);
    let mut mass = Tridiag::zeros(nn);
    for e in 0..ne {
        let h = mesh.cell_width(e);
        let local = local_weighted_mass(x[e], x[e + 1], &origin_rules[e], |d| d.powf(-2.0 * s));
        scatter_tridiag(&mut hardy, e, local);
        scatter_tridiag(&mut mass, e, [h / 3.0, h / 6.0, h / 3.0]);
    }
    let lumped_mass = mesh.lumped_mass();
    let mut ops = OperatorSet {
        mesh,
        s,
        stiffness,
        hardy,
        mass,
        lumped_mass,
        hardy_levels: Vec::new(),
        origin_rules,
    };
    ops.hardy_levels = reg_levels
        .iter()
        .map(|&n| (n, ops.hardy_regularized(n)))
        .collect();
    Ok(ops)
}

impl OperatorSet {
    pub fn interior_count(&self) -> usize {
        self.mesh.interior_count()
    }

    pub fn params(&self) -> HardyParams {
        HardyParams {
            dim: 1,
            s: self.s,
            lambda: 0.0,
            gamma: 1.0,
        }
    }

    /// Matrix of `∫ φ_i φ_j / (|x|^{2s} + 1/n)` over all nodes.
    ///
    /// Uses the same quadrature points as the unregularized Hardy matrix, so
    /// the entrywise ordering `H_{n1} <= H_{n2} <= H` holds exactly.
    pub fn hardy_regularized(&self, n: u64) -> Tridiag {
        if let Some((_, t)) = self.hardy_levels.iter().find(|(m, _)| *m == n) {
            return t.clone();
        }
        let x = &self.mesh.nodes;
        let eps = 1.0 / n as f64;
        let two_s = 2.0 * self.s;
        let mut out = Tridiag::zeros(self.mesh.node_count());
        for e in 0..self.mesh.cells() {
            let local = local_weighted_mass(x[e], x[e + 1], &self.origin_rules[e], |d| {
                1.0 / (d.powf(two_s) + eps)
            });
            scatter_tridiag(&mut out, e, local);
        }
        out
    }

    /// Hardy matrix for a regularization level; `None` means no truncation.
    pub fn hardy_for(&self, level: Option<u64>) -> Tridiag {
        match level {
            Some(n) => self.hardy_regularized(n),
            None => self.hardy.clone(),
        }
    }

    /// `uᵀ A u` for a vector of interior values.
    pub fn energy_form(&self, interior: &[f64]) -> f64 {
        crate::linalg::dot(&crate::linalg::mat_vec(&self.stiffness, interior), interior)
    }

    /// Interior lumped mass.
    pub fn lumped_interior(&self) -> &[f64] {
        &self.lumped_mass[1..self.lumped_mass.len() - 1]
    }

    /// Largest `A_ij / max|A|` over positive off-diagonal entries and their
    /// count; the comparison arguments rely on these being absent.
    pub fn offdiag_sign_report(&self) -> (usize, f64) {
        let n = self.stiffness.nrows();
        let amax = (0..n)
            .map(|i| self.stiffness[(i, i)].abs())
            .fold(0.0, f64::max);
        let mut count = 0;
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                if i != j && self.stiffness[(i, j)] > 0.0 {
                    count += 1;
                    worst = worst.max(self.stiffness[(i, j)] / amax);
                }
            }
        }
        (count, worst)
    }

    /// Writes the interior stiffness, Hardy and mass matrices as
    /// `i j value` lines (0-based interior indices, 17 significant digits).
    pub fn export_coordinate(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        let a_path = dir.join("stiffness.txt");
        let mut buf = Vec::new();
        let n = self.stiffness.nrows();
        for i in 0..n {
            for j in 0..n {
                writeln!(buf, "{} {} {:.16e}", i, j, self.stiffness[(i, j)]).unwrap();
            }
        }
        std::fs::write(&a_path, &buf).map_err(|e| Error::io(&a_path, e))?;
        written.push(a_path);
        for (name, t) in [
            ("hardy.txt", self.hardy.interior()),
            ("mass.txt", self.mass.interior()),
        ] {
            let path = dir.join(name);
            let mut buf = Vec::new();
            for i in 0..t.dim() {
                if i > 0 {
                    writeln!(buf, "{} {} {:.16e}", i, i - 1, t.off[i - 1]).unwrap();
                }
                writeln!(buf, "{} {} {:.16e}", i, i, t.diag[i]).unwrap();
                if i + 1 < t.dim() {
                    writeln!(buf, "{} {} {:.16e}", i, i + 1, t.off[i]).unwrap();
                }
            }
            std::fs::write(&path, &buf).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Smallest generalized eigenvalue of `(A, H)` on the interior subspace:
/// the discrete minimum of the Hardy Rayleigh quotient.
pub fn rayleigh_hardy_min(ops: &OperatorSet) -> Result<f64> {
    rayleigh_min_with(ops, &ops.hardy)
}

/// Smallest generalized eigenvalue of `(A, W)` for a full-node tridiagonal
/// weight matrix `W` (Hardy, regularized Hardy, or mass).
pub fn rayleigh_min_with(ops: &OperatorSet, weight: &Tridiag) -> Result<f64> {
    let ev = generalized_eigenvalues_tridiag(&ops.stiffness, &weight.interior())?;
    ev.first()
        .copied()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Eigensolver("empty spectrum".into()))
}
