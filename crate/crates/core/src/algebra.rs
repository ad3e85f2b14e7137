//! The coordinate algebra attached to an ordinary n-gon: multiplication and
//! division `K x L -> K`, the maps `rho_b`, `mu_a` and `pi_y`, and the right
//! loop `(K, 0_K, +, -)`.
//!
//! With `x = (x_0, ..., x_{2n-1})`:
//! `0_K = x_1`, `inf_K = x_{2n-1}`, `K = V_{x_0} - {inf_K}`,
//! `0_L = x_{n-2}`, `inf_L = x_n`, `L = V_{x_{n-1}} - {inf_L}`.
//! Elements are vertices of the geometry. Every `f_{n-1}` evaluation checks
//! its distance precondition.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::chains::f_k;
use crate::error::{Error, Result};
use crate::incidence::{IncidenceStructure, VertexRef};
use crate::projmaps::{from_path, invert, Projectivity};
use crate::schubert::{default_ngon, OrdinaryNgon};

/// An ordinary n-gon with a unit `1_L` and the auxiliary element `e`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoordinateFrame {
    pub ngon: OrdinaryNgon,
    pub one_l: VertexRef,
    pub e: VertexRef,
}

impl CoordinateFrame {
    /// `one_l` must lie in `V_{x_{n-1}} - {x_{n-2}, x_n}` and `e` in
    /// `V_{x_{n+1}} - {x_n, x_{n+2}}`.
    pub fn new(s: &IncidenceStructure, ngon: OrdinaryNgon, one_l: VertexRef, e: VertexRef) -> Result<Self> {
        let n = ngon.n();
        if n < 3 {
            return Err(Error::Argument(format!("coordinate frames need n >= 3, got {n}")));
        }
        let admissible = |w: VertexRef, at: usize| {
            s.incident(w, ngon.x(at)) && w != ngon.x(at - 1) && w != ngon.x(at + 1)
        };
        if !admissible(one_l, n - 1) {
            return Err(Error::Argument(format!(
                "1_L = {one_l} is not in V_{} - {{{}, {}}}",
                ngon.x(n - 1),
                ngon.x(n - 2),
                ngon.x(n)
            )));
        }
        if !admissible(e, n + 1) {
            return Err(Error::Argument(format!(
                "e = {e} is not in V_{} - {{{}, {}}}",
                ngon.x(n + 1),
                ngon.x(n),
                ngon.x(n + 2)
            )));
        }
        Ok(CoordinateFrame { ngon, one_l, e })
    }

    /// Every admissible `(1_L, e)` on one n-gon.
    pub fn sweep(s: &IncidenceStructure, ngon: &OrdinaryNgon) -> Result<Vec<CoordinateFrame>> {
        let n = ngon.n();
        let mut out = Vec::new();
        for &one_l in s.neighbors(ngon.x(n - 1)) {
            for &e in s.neighbors(ngon.x(n + 1)) {
                if let Ok(frame) = CoordinateFrame::new(s, ngon.clone(), one_l, e) {
                    out.push(frame);
                }
            }
        }
        Ok(out)
    }

    /// The smallest n-gon through the smallest flag, with the smallest `1_L` and `e`.
    pub fn auto(s: &IncidenceStructure, n: usize) -> Result<CoordinateFrame> {
        let base = *s
            .flags()
            .first()
            .ok_or_else(|| Error::Argument("structure has no flags".into()))?;
        let ngon = default_ngon(s, base, n)?;
        CoordinateFrame::sweep(s, &ngon)?
            .into_iter()
            .next()
            .ok_or_else(|| Error::Precondition("no admissible 1_L and e (thin structure?)".into()))
    }

    pub fn n(&self) -> usize {
        self.ngon.n()
    }

    pub fn x(&self, i: usize) -> VertexRef {
        self.ngon.x(i)
    }

    pub fn zero_k(&self) -> VertexRef {
        self.x(1)
    }

    pub fn infinity_k(&self) -> VertexRef {
        self.x(2 * self.n() - 1)
    }

    pub fn zero_l(&self) -> VertexRef {
        self.x(self.n() - 2)
    }

    pub fn infinity_l(&self) -> VertexRef {
        self.x(self.n())
    }

    /// `K`, sorted.
    pub fn k_set(&self, s: &IncidenceStructure) -> Vec<VertexRef> {
        let inf = self.infinity_k();
        s.neighbors(self.x(0)).iter().copied().filter(|&w| w != inf).collect()
    }

    /// `L`, sorted.
    pub fn l_set(&self, s: &IncidenceStructure) -> Vec<VertexRef> {
        let inf = self.infinity_l();
        s.neighbors(self.x(self.n() - 1))
            .iter()
            .copied()
            .filter(|&w| w != inf)
            .collect()
    }
}

/// `f_{n-1}`, a failed precondition reported as a broken geometry.
fn f(s: &IncidenceStructure, x: VertexRef, y: VertexRef, n: usize) -> Result<VertexRef> {
    f_k(s, x, y, n - 1).map_err(|e| match e {
        Error::Domain(msg) => Error::integrity(msg, vec![vec![x, y]]),
        other => other,
    })
}

fn require_member(set: &[VertexRef], x: VertexRef, name: &str) -> Result<()> {
    if set.binary_search(&x).is_err() {
        return Err(Error::Domain(format!("{x} is not in {name}")));
    }
    Ok(())
}

/// `f(f(f(f(a, b), x_{2n-2}), c), x_0)`.
fn nested(s: &IncidenceStructure, frame: &CoordinateFrame, a: VertexRef, b: VertexRef, c: VertexRef) -> Result<VertexRef> {
    let n = frame.n();
    let w = f(s, a, b, n)?;
    let w = f(s, w, frame.x(2 * n - 2), n)?;
    let w = f(s, w, c, n)?;
    f(s, w, frame.x(0), n)
}

/// `x . y = f(f(f(f(x, 1_L), x_{2n-2}), y), x_0)` for `x` in K, `y` in L.
pub fn multiply(s: &IncidenceStructure, frame: &CoordinateFrame, x: VertexRef, y: VertexRef) -> Result<VertexRef> {
    require_member(&frame.k_set(s), x, "K")?;
    require_member(&frame.l_set(s), y, "L")?;
    nested(s, frame, x, frame.one_l, y)
}

/// `x / y = f(f(f(f(x, y), x_{2n-2}), 1_L), x_0)` for `y != 0_L`.
pub fn divide(s: &IncidenceStructure, frame: &CoordinateFrame, x: VertexRef, y: VertexRef) -> Result<VertexRef> {
    require_member(&frame.k_set(s), x, "K")?;
    require_member(&frame.l_set(s), y, "L")?;
    if y == frame.zero_l() {
        return Err(Error::Domain("division by 0_L".into()));
    }
    nested(s, frame, x, y, frame.one_l)
}

/// `rho_b: L + {inf_L} -> K + {inf_K}`, `y -> b . y`, for `b != 0_K`.
pub fn rho(s: &IncidenceStructure, frame: &CoordinateFrame, b: VertexRef, y: VertexRef) -> Result<VertexRef> {
    require_member(&frame.k_set(s), b, "K")?;
    if b == frame.zero_k() {
        return Err(Error::Domain("rho_b needs b != 0_K".into()));
    }
    if !s.incident(y, frame.x(frame.n() - 1)) {
        return Err(Error::Domain(format!("{y} is not in L + {{inf_L}}")));
    }
    nested(s, frame, b, frame.one_l, y)
}

/// `mu_a = [x_{2n-2}, a, x_0]` for `a` in `V_{x_{n-1}} - {x_{n-2}, x_n}`.
pub fn mu(s: &IncidenceStructure, frame: &CoordinateFrame, a: VertexRef) -> Result<Projectivity> {
    let n = frame.n();
    if !s.incident(a, frame.x(n - 1)) || a == frame.zero_l() || a == frame.infinity_l() {
        return Err(Error::Domain(format!("mu_a needs a in V_{} - {{0_L, inf_L}}, got {a}", frame.x(n - 1))));
    }
    opposition_path(s, &[frame.x(2 * n - 2), a, frame.x(0)], n)
}

/// `pi_y = [x_0, x_n, f(e, y), x_{n+2}, f(e, x_1), x_n, x_0]` for `y` in K.
pub fn pi(s: &IncidenceStructure, frame: &CoordinateFrame, y: VertexRef) -> Result<Projectivity> {
    require_member(&frame.k_set(s), y, "K")?;
    let n = frame.n();
    let (x0, xn) = (frame.x(0), frame.x(n));
    let path = [
        x0,
        xn,
        f(s, frame.e, y, n)?,
        frame.x(n + 2),
        f(s, frame.e, frame.x(1), n)?,
        xn,
        x0,
    ];
    opposition_path(s, &path, n)
}

fn opposition_path(s: &IncidenceStructure, path: &[VertexRef], n: usize) -> Result<Projectivity> {
    from_path(s, path, n).map_err(|e| match e {
        Error::Domain(msg) => Error::integrity(msg, vec![path.to_vec()]),
        other => other,
    })
}

/// `x + y = pi_y(x)`.
pub fn add(s: &IncidenceStructure, frame: &CoordinateFrame, x: VertexRef, y: VertexRef) -> Result<VertexRef> {
    require_member(&frame.k_set(s), x, "K")?;
    Ok(pi(s, frame, y)?.apply(x).expect("K is inside V_{x_0}"))
}

/// `x - y = pi_y^-1(x)`.
pub fn sub(s: &IncidenceStructure, frame: &CoordinateFrame, x: VertexRef, y: VertexRef) -> Result<VertexRef> {
    require_member(&frame.k_set(s), x, "K")?;
    Ok(invert(&pi(s, frame, y)?).apply(x).expect("K is inside V_{x_0}"))
}

/// One failed identity, with its operands.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub axiom: String,
    pub operands: Vec<VertexRef>,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct LoopReport {
    pub frame: CoordinateFrame,
    pub checks: usize,
    pub violations: Vec<Violation>,
}

impl LoopReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

struct Audit {
    checks: usize,
    violations: Vec<Violation>,
}

impl Audit {
    fn expect(&mut self, axiom: &str, operands: &[VertexRef], got: Result<VertexRef>, want: VertexRef) {
        self.checks += 1;
        let detail = match got {
            Ok(v) if v == want => return,
            Ok(v) => format!("got {v}, expected {want}"),
            Err(e) => e.to_string(),
        };
        self.violations.push(Violation {
            axiom: axiom.into(),
            operands: operands.to_vec(),
            detail,
        });
    }

    fn fail(&mut self, axiom: &str, operands: &[VertexRef], detail: String) {
        self.checks += 1;
        self.violations.push(Violation {
            axiom: axiom.into(),
            operands: operands.to_vec(),
            detail,
        });
    }
}

/// Exhaustive check of the multiplication, division, `rho`, `pi`, `mu` and
/// right-loop identities on one frame. Evaluation failures are violations.
pub fn verify_right_loop(s: &IncidenceStructure, frame: &CoordinateFrame) -> LoopReport {
    let mut audit = Audit {
        checks: 0,
        violations: Vec::new(),
    };
    let k = frame.k_set(s);
    let l = frame.l_set(s);
    let (zk, zl, one) = (frame.zero_k(), frame.zero_l(), frame.one_l);
    let mul = |x, y| multiply(s, frame, x, y);
    let div = |x, y| divide(s, frame, x, y);

    for &x in &k {
        audit.expect("x . 0_L = 0_K", &[x], mul(x, zl), zk);
        audit.expect("x . 1_L = x", &[x], mul(x, one), x);
    }
    for &y in &l {
        audit.expect("0_K . y = 0_K", &[y], mul(zk, y), zk);
    }
    for &x in &k {
        for &y in l.iter().filter(|&&y| y != zl) {
            audit.expect("(x . y) / y = x", &[x, y], mul(x, y).and_then(|w| div(w, y)), x);
            audit.expect("(x / y) . y = x", &[x, y], div(x, y).and_then(|w| mul(w, y)), x);
        }
    }

    for &b in k.iter().filter(|&&b| b != zk) {
        audit.expect("rho_b(0_L) = 0_K", &[b], rho(s, frame, b, zl), zk);
        audit.expect("rho_b(1_L) = b", &[b], rho(s, frame, b, one), b);
        let mut domain = l.clone();
        domain.push(frame.infinity_l());
        let images: Result<Vec<VertexRef>> = domain.iter().map(|&y| rho(s, frame, b, y)).collect();
        match images {
            Ok(mut images) => {
                images.sort_unstable();
                images.dedup();
                if images.len() == domain.len() {
                    audit.checks += 1;
                } else {
                    audit.fail("rho_b is injective", &[b], format!("{} images for {} arguments", images.len(), domain.len()));
                }
            }
            Err(e) => audit.fail("rho_b is defined on L + {inf_L}", &[b], e.to_string()),
        }
    }

    let pis: Vec<(VertexRef, Result<Projectivity>)> = k.iter().map(|&y| (y, pi(s, frame, y))).collect();
    for (y, p) in &pis {
        match p {
            Ok(p) => {
                audit.expect("pi_y(inf_K) = inf_K", &[*y], apply(p, frame.infinity_k()), frame.infinity_k());
                audit.expect("pi_y(0_K) = y", &[*y], apply(p, zk), *y);
                if *y == zk {
                    if p.is_identity() {
                        audit.checks += 1;
                    } else {
                        audit.fail("pi_0K = id", &[*y], format!("{p} is not the identity"));
                    }
                }
            }
            Err(e) => audit.fail("pi_y is defined", &[*y], e.to_string()),
        }
    }
    let plus = |x: VertexRef, y: VertexRef| -> Result<VertexRef> {
        let p = pis.iter().find(|(v, _)| *v == y).expect("y in K").1.as_ref();
        p.map_err(|e| Error::integrity(e.to_string(), vec![]))
            .and_then(|p| apply(p, x))
    };
    let minus = |x: VertexRef, y: VertexRef| -> Result<VertexRef> {
        let p = pis.iter().find(|(v, _)| *v == y).expect("y in K").1.as_ref();
        p.map_err(|e| Error::integrity(e.to_string(), vec![]))
            .and_then(|p| apply(&invert(p), x))
    };
    for &x in &k {
        audit.expect("x + 0_K = x", &[x], plus(x, zk), x);
        audit.expect("0_K + x = x", &[x], plus(zk, x), x);
        for &y in &k {
            audit.expect("(x + y) - y = x", &[x, y], plus(x, y).and_then(|w| minus(w, y)), x);
            audit.expect("(x - y) + y = x", &[x, y], minus(x, y).and_then(|w| plus(w, y)), x);
        }
    }

    let n = frame.n();
    let mu_one = mu(s, frame, one);
    for &a in l.iter().filter(|&&a| a != zl) {
        let mu_a = mu(s, frame, a);
        match (&mu_one, &mu_a) {
            (Ok(m1), Ok(ma)) => {
                audit.expect("mu_a fixes inf_K", &[a], apply(ma, frame.infinity_k()), frame.infinity_k());
                audit.expect("mu_a(0_K) = x_{2n-3}", &[a], apply(ma, zk), frame.x(2 * n - 3));
                for &x in &k {
                    let composed = apply(m1, x).and_then(|w| apply(&invert(ma), w));
                    match mul(x, a) {
                        Ok(want) => audit.expect("x . a = mu_a^-1 mu_1L (x)", &[x, a], composed, want),
                        Err(e) => audit.fail("x . a is defined", &[x, a], e.to_string()),
                    }
                }
            }
            (Err(e), _) | (_, Err(e)) => audit.fail("mu_a is defined", &[a], e.to_string()),
        }
    }
    LoopReport {
        frame: frame.clone(),
        checks: audit.checks,
        violations: audit.violations,
    }
}

fn apply(p: &Projectivity, x: VertexRef) -> Result<VertexRef> {
    p.apply(x)
        .ok_or_else(|| Error::Domain(format!("{x} is not in the domain of {p}")))
}

/// `verify_right_loop` over every admissible frame on one n-gon.
pub fn sweep_right_loop(s: &IncidenceStructure, ngon: &OrdinaryNgon) -> Result<Vec<LoopReport>> {
    Ok(CoordinateFrame::sweep(s, ngon)?
        .par_iter()
        .map(|frame| verify_right_loop(s, frame))
        .collect())
}

/// An operation table: `entries[i][j]` is `rows[i] op columns[j]`, `None` where undefined.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OperationTable {
    pub operation: String,
    pub rows: Vec<VertexRef>,
    pub columns: Vec<VertexRef>,
    pub entries: Vec<Vec<Option<VertexRef>>>,
}

impl OperationTable {
    /// Header row of column ids, then one row per `x`; undefined entries are empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{}", self.operation);
        for c in &self.columns {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
        for (r, row) in self.rows.iter().zip(&self.entries) {
            let _ = write!(out, "{r}");
            for e in row {
                match e {
                    Some(v) => {
                        let _ = write!(out, ",{v}");
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operation {
    Multiply,
    Divide,
    Add,
    Subtract,
}

/// The full table of one operation on a frame.
pub fn operation_table(s: &IncidenceStructure, frame: &CoordinateFrame, op: Operation) -> OperationTable {
    let k = frame.k_set(s);
    let (name, columns) = match op {
        Operation::Multiply => ("*", frame.l_set(s)),
        Operation::Divide => (
            "/",
            frame.l_set(s).into_iter().filter(|&y| y != frame.zero_l()).collect(),
        ),
        Operation::Add => ("+", k.clone()),
        Operation::Subtract => ("-", k.clone()),
    };
    let entries = k
        .iter()
        .map(|&x| {
            columns
                .iter()
                .map(|&y| {
                    match op {
                        Operation::Multiply => multiply(s, frame, x, y),
                        Operation::Divide => divide(s, frame, x, y),
                        Operation::Add => add(s, frame, x, y),
                        Operation::Subtract => sub(s, frame, x, y),
                    }
                    .ok()
                })
                .collect()
        })
        .collect();
    OperationTable {
        operation: name.into(),
        rows: k,
        columns,
        entries,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{projective_plane, symplectic_quadrangle};
    use crate::projmaps::compose;
    use crate::Flag;

    #[test]
    fn frame_constants() {
        let s = symplectic_quadrangle(2).unwrap();
        let frame = CoordinateFrame::auto(&s, 4).unwrap();
        assert_eq!(frame.zero_k(), frame.x(1));
        assert_eq!(frame.infinity_k(), frame.x(7));
        assert_eq!(frame.zero_l(), frame.x(2));
        assert_eq!(frame.infinity_l(), frame.x(4));
        assert_eq!(frame.k_set(&s).len(), 2);
        assert_eq!(frame.l_set(&s).len(), 2);
        assert!(CoordinateFrame::new(&s, frame.ngon.clone(), frame.zero_l(), frame.e).is_err());
        assert!(CoordinateFrame::new(&s, frame.ngon.clone(), frame.one_l, frame.x(4)).is_err());
    }

    #[test]
    fn plane_axioms_every_frame() {
        let s = projective_plane(2).unwrap();
        let ngon = default_ngon(&s, Flag::new(0, 0), 3).unwrap();
        let reports = sweep_right_loop(&s, &ngon).unwrap();
        assert_eq!(reports.len(), 1);
        for r in reports {
            assert!(r.passed(), "{:?}", r.violations);
        }
    }

    #[test]
    fn division_and_rho_domains() {
        let s = projective_plane(3).unwrap();
        let frame = CoordinateFrame::auto(&s, 3).unwrap();
        let x = frame.k_set(&s)[0];
        assert!(matches!(divide(&s, &frame, x, frame.zero_l()), Err(Error::Domain(_))));
        assert!(matches!(rho(&s, &frame, frame.zero_k(), frame.one_l), Err(Error::Domain(_))));
        assert!(matches!(multiply(&s, &frame, frame.infinity_k(), frame.one_l), Err(Error::Domain(_))));
    }

    #[test]
    fn pi_zero_is_identity_and_mu_roundtrip() {
        let s = symplectic_quadrangle(2).unwrap();
        let frame = CoordinateFrame::auto(&s, 4).unwrap();
        assert!(pi(&s, &frame, frame.zero_k()).unwrap().is_identity());
        let m = mu(&s, &frame, frame.one_l).unwrap();
        assert!(compose(&invert(&m), &m).unwrap().is_identity());
        assert_eq!(m.apply(frame.x(7)), Some(frame.x(7)));
        assert_eq!(m.apply(frame.x(1)), Some(frame.x(5)));
    }

    #[test]
    fn tables_and_csv() {
        let s = projective_plane(3).unwrap();
        let frame = CoordinateFrame::auto(&s, 3).unwrap();
        let t = operation_table(&s, &frame, Operation::Add);
        assert_eq!(t.rows.len(), 3);
        for row in &t.entries {
            let mut vals: Vec<_> = row.iter().map(|v| v.unwrap()).collect();
            vals.sort_unstable();
            vals.dedup();
            assert_eq!(vals.len(), 3);
        }
        let csv = t.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("+,"));
    }
}
