//! Certified example groups and representations shipped with the library.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{Group, Membership, PeripheralSubgroup, RatMatrix, Representation};
use crate::error::{Error, Result};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Hyperbolic generator of the ping-pong group: eigenvalues 5 and 1/5,
/// fixed points ±1 on the projective line.
pub fn pingpong_hyperbolic() -> RatMatrix {
    RatMatrix::from_rows(&[vec![q(13, 5), q(12, 5)], vec![q(12, 5), q(13, 5)]]).expect("square")
}

/// Parabolic generator `x ↦ x + 4`.
pub fn pingpong_parabolic() -> RatMatrix {
    RatMatrix::from_integers(&[&[1, 4], &[0, 1]])
}

/// Closed interval `[lo, hi]` of the real line.
#[derive(Clone, Debug)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Interval {
    fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }
    fn contains_strictly(&self, x: &BigRational) -> bool {
        &self.lo < x && x < &self.hi
    }
}

/// Point of the projective line; `None` is ∞.
type Proj = Option<BigRational>;

fn mobius(m: &RatMatrix, x: &Proj) -> Proj {
    let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
    match x {
        None => {
            if c.is_zero() {
                None
            } else {
                Some(a / c)
            }
        }
        Some(x) => {
            let den = &c * x + &d;
            if den.is_zero() {
                None
            } else {
                Some((a * x + b) / den)
            }
        }
    }
}

/// Exact ping-pong data for a hyperbolic/parabolic pair acting on the
/// projective line. Verification proves the pair freely generates.
#[derive(Clone, Debug)]
pub struct PingPongCertificate {
    pub hyperbolic: usize,
    pub attracting: Interval,
    pub repelling: Interval,
    pub parabolic: usize,
    /// The parabolic's table is `{|x| ≥ half_width} ∪ {∞}`.
    pub half_width: BigRational,
}

impl PingPongCertificate {
    pub fn builtin() -> Self {
        PingPongCertificate {
            hyperbolic: 0,
            attracting: Interval { lo: q(2, 3), hi: q(3, 2) },
            repelling: Interval { lo: q(-3, 2), hi: q(-2, 3) },
            parabolic: 1,
            half_width: q(2, 1),
        }
    }

    fn check_contraction(h: &RatMatrix, from: &Interval, into: &Interval, label: &str) -> Result<()> {
        let fail = |what: &str| Err(Error::ConstraintViolated(format!("ping-pong {label}: {what}")));
        let c = h.get(1, 0);
        if c.is_zero() {
            return fail("generator fixes infinity");
        }
        let pole = -h.get(1, 1) / c;
        if !from.contains_strictly(&pole) {
            return fail("pole outside the repelling interval");
        }
        for x in [Some(from.lo.clone()), Some(from.hi.clone()), None] {
            match mobius(h, &x) {
                Some(y) if into.contains(&y) => {}
                _ => return fail("boundary image escapes the attracting interval"),
            }
        }
        Ok(())
    }

    pub fn verify(&self, group: &Group) -> Result<()> {
        if group.dim() != 2 {
            return Err(Error::Unsupported("ping-pong certificates act on the projective line".into()));
        }
        let h = &group.matrices[self.hyperbolic];
        let p = &group.matrices[self.parabolic];
        let (a, r) = (&self.attracting, &self.repelling);
        if !(a.lo < a.hi && r.lo < r.hi && (r.hi < a.lo || a.hi < r.lo)) {
            return Err(Error::ConstraintViolated("ping-pong intervals overlap".into()));
        }
        Self::check_contraction(h, r, a, "h")?;
        Self::check_contraction(&h.inverse()?, a, r, "h^-1")?;
        let one = BigRational::from_integer(1.into());
        if !(p.get(1, 0).is_zero() && p.get(0, 0) == one && p.get(1, 1) == one) {
            return Err(Error::ConstraintViolated("parabolic generator is not a translation".into()));
        }
        let t = p.get(0, 1).abs();
        let reach = [&a.lo, &a.hi, &r.lo, &r.hi].iter().map(|x| x.abs()).max().expect("nonempty");
        if !(self.half_width > reach) {
            return Err(Error::ConstraintViolated("parabolic table meets the hyperbolic table".into()));
        }
        // |x + n t| ≥ |t| − reach for |x| ≤ reach and n ≠ 0.
        if t - &reach < self.half_width {
            return Err(Error::ConstraintViolated("translation too short to reach its table".into()));
        }
        Ok(())
    }
}

/// Rank-2 free group ⟨a, b⟩ with peripheral ⟨b⟩, certified by ping-pong.
pub fn pingpong_group() -> Group {
    let per = PeripheralSubgroup { id: "P_b".into(), generators: vec![1], membership: Membership::Syllable };
    let mut g = Group::new(
        "pingpong",
        vec!["a".into(), "b".into()],
        vec![pingpong_hyperbolic(), pingpong_parabolic()],
        vec![per],
        true,
        false,
    )
    .expect("valid built-in group");
    PingPongCertificate::builtin().verify(&g).expect("built-in certificate");
    g.free_basis = true;
    g.relatively_hyperbolic_asserted = true;
    g
}

/// Same group, peripheral membership decided by the fixed vector `e₁`.
pub fn pingpong_group_fixed_vector() -> Group {
    let mut g = pingpong_group();
    g.peripherals[0].membership = Membership::FixedVector(vec![q(1, 1), q(0, 1)]);
    g
}

/// `Sym^power` of the ping-pong group (dimension `power + 1`).
pub fn pingpong_sym(power: usize) -> (Group, Representation) {
    let g = pingpong_group();
    let rep = Representation::symmetric_power(&g, power).expect("dimension 2");
    (g, rep)
}

/// The SL(4) family `a ↦ I₂ ⊕ a`, `b ↦ [[1,t],[0,1]] ⊕ b` on the ping-pong group.
pub fn intro_family(t: i64) -> (Group, Representation) {
    let g = pingpong_group();
    let i2 = RatMatrix::identity(2);
    let ut = RatMatrix::from_integers(&[&[1, t], &[0, 1]]);
    let images = vec![i2.direct_sum(&g.matrices[0]), ut.direct_sum(&g.matrices[1])];
    let rep = Representation::explicit(format!("intro_t{t}"), &g, images).expect("valid images");
    (g, rep)
}

/// Discrete Heisenberg group in SL(3, Z), generated by `I + E₁₂` and `I + E₂₃`.
pub fn heisenberg_group() -> Group {
    let x = RatMatrix::from_integers(&[&[1, 1, 0], &[0, 1, 0], &[0, 0, 1]]);
    let y = RatMatrix::from_integers(&[&[1, 0, 0], &[0, 1, 1], &[0, 0, 1]]);
    let per = PeripheralSubgroup {
        id: "H".into(),
        generators: vec![0, 1],
        membership: Membership::FixedVector(vec![q(1, 1), q(0, 1), q(0, 1)]),
    };
    let mut g = Group::new("heisenberg", vec!["x".into(), "y".into()], vec![x, y], vec![per], true, false)
        .expect("valid built-in group");
    g.relatively_hyperbolic_asserted = false;
    g
}

/// Order-3 rotation; its Cayley graph is a triangle.
pub fn cyclic3_group() -> Group {
    let r = RatMatrix::from_integers(&[&[0, -1], &[1, -1]]);
    Group::new("cyclic3", vec!["r".into()], vec![r], vec![], true, false).expect("valid built-in group")
}

/// Names accepted by [`builtin_by_name`].
pub const BUILTIN_NAMES: &[&str] = &["pingpong", "pingpong-sym2", "pingpong-sym3", "intro-t0", "intro-t1", "heisenberg"];

pub fn builtin_by_name(name: &str) -> Result<(Group, Representation)> {
    match name {
        "pingpong" => {
            let g = pingpong_group();
            let r = Representation::identity(&g);
            Ok((g, r))
        }
        "pingpong-sym2" => Ok(pingpong_sym(2)),
        "pingpong-sym3" => Ok(pingpong_sym(3)),
        "intro-t0" => Ok(intro_family(0)),
        "intro-t1" => Ok(intro_family(1)),
        "heisenberg" => {
            let g = heisenberg_group();
            let r = Representation::identity(&g);
            Ok((g, r))
        }
        other => Err(Error::Config(format!(
            "unknown built-in `{other}`; expected one of {BUILTIN_NAMES:?}"
        ))),
    }
}
