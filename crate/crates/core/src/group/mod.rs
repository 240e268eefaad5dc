//! Finitely generated matrix groups with designated peripheral subgroups.

mod ball;
pub mod builtin;
pub mod config;
mod ratmat;
mod rep;
mod word;

pub use ball::{enumerate_ball, Ball};
pub use ratmat::RatMatrix;
pub use rep::{sym_power_exact, RepKind, Representation};
pub use word::{free_reduce, free_reduce_text, invert, DisplayWord, GeneratingSet, Symbol, Word};

use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};

/// A reduced word together with its exact matrix image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupElement {
    pub word: Word,
    pub matrix: RatMatrix,
}

impl GroupElement {
    pub fn length(&self) -> usize {
        self.word.len()
    }
}

/// How membership in a peripheral subgroup is decided.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Membership {
    /// Reduced word uses only the marked generators. Exact when the
    /// generators are a free basis (free products of cyclic factors).
    Syllable,
    /// `g ∈ P` iff `g v = v`, for a declared vector `v` fixed exactly by `P`.
    FixedVector(#[serde(serialize_with = "ser_rationals")] Vec<BigRational>),
    /// No procedure declared; membership queries are rejected.
    Undeclared,
}

fn ser_rationals<S: serde::Serializer>(v: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|q| q.to_string()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeripheralSubgroup {
    pub id: String,
    pub generators: Vec<usize>,
    pub membership: Membership,
}

#[derive(Clone, Debug)]
pub struct Group {
    pub name: String,
    pub gens: GeneratingSet,
    pub matrices: Vec<RatMatrix>,
    inverses: Vec<RatMatrix>,
    pub peripherals: Vec<PeripheralSubgroup>,
    /// Declared by configuration; ball enumeration refuses unfaithful groups.
    pub faithful: bool,
    /// The generators are known to freely generate (e.g. ping-pong certified).
    pub free_basis: bool,
    /// Relative hyperbolicity of (group, peripherals) as asserted by the user.
    pub relatively_hyperbolic_asserted: bool,
}

impl Group {
    pub fn new(
        name: impl Into<String>,
        names: Vec<String>,
        matrices: Vec<RatMatrix>,
        peripherals: Vec<PeripheralSubgroup>,
        faithful: bool,
        free_basis: bool,
    ) -> Result<Self> {
        if names.len() != matrices.len() {
            return Err(Error::Config(format!(
                "{} generator names but {} matrices",
                names.len(),
                matrices.len()
            )));
        }
        if matrices.is_empty() {
            return Err(Error::Config("group has no generators".into()));
        }
        let d = matrices[0].dim();
        let mut inverses = Vec::with_capacity(matrices.len());
        for (n, m) in names.iter().zip(&matrices) {
            if m.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: m.dim() });
            }
            if m.det() != BigRational::one() {
                return Err(Error::Config(format!("generator `{n}` does not have determinant 1")));
            }
            inverses.push(m.inverse()?);
        }
        let marks = peripherals.iter().map(|p| p.generators.clone()).collect();
        let gens = GeneratingSet::new(names, marks)?;
        for p in &peripherals {
            if let Membership::FixedVector(v) = &p.membership {
                if v.len() != d {
                    return Err(Error::DimensionMismatch { expected: d, got: v.len() });
                }
                for &g in &p.generators {
                    if matrices[g].apply(v) != *v {
                        return Err(Error::Config(format!(
                            "peripheral `{}`: generator `{}` does not fix the declared vector",
                            p.id, gens.names[g]
                        )));
                    }
                }
            }
        }
        Ok(Group {
            name: name.into(),
            gens,
            matrices,
            inverses,
            peripherals,
            faithful,
            free_basis,
            relatively_hyperbolic_asserted: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].dim()
    }

    pub fn symbol_matrix(&self, s: Symbol) -> &RatMatrix {
        if s.is_inverse() {
            &self.inverses[s.generator()]
        } else {
            &self.matrices[s.generator()]
        }
    }

    pub fn evaluate(&self, word: &[Symbol]) -> RatMatrix {
        let mut m = RatMatrix::identity(self.dim());
        for &s in word {
            m = m.mul(self.symbol_matrix(s));
        }
        m
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement { word: Vec::new(), matrix: RatMatrix::identity(self.dim()) }
    }

    /// Element for an explicit word; the word is freely reduced first.
    pub fn element(&self, word: &[Symbol]) -> Result<GroupElement> {
        self.gens.validate(word)?;
        let w = free_reduce(word);
        let matrix = self.evaluate(&w);
        Ok(GroupElement { word: w, matrix })
    }

    pub fn parse_element(&self, text: &str) -> Result<GroupElement> {
        let w = self.gens.parse_tokens(text)?;
        self.element(&w)
    }

    pub fn power(&self, word: &[Symbol], n: usize) -> Result<GroupElement> {
        let mut w = Vec::with_capacity(word.len() * n);
        for _ in 0..n {
            w.extend_from_slice(word);
        }
        self.element(&w)
    }

    pub fn multiply(&self, g: &GroupElement, h: &GroupElement) -> GroupElement {
        let mut w = g.word.clone();
        w.extend_from_slice(&h.word);
        GroupElement { word: free_reduce(&w), matrix: g.matrix.mul(&h.matrix) }
    }

    pub fn inverse(&self, g: &GroupElement) -> GroupElement {
        let word = invert(&g.word);
        let matrix = self.evaluate(&word);
        GroupElement { word, matrix }
    }

    pub fn peripheral_index(&self, id: &str) -> Option<usize> {
        self.peripherals.iter().position(|p| p.id == id)
    }

    /// Decides `g ∈ ⟨S∩P⟩` by the peripheral's declared procedure.
    pub fn peripheral_membership(&self, g: &GroupElement, p: usize) -> Result<bool> {
        let per = self
            .peripherals
            .get(p)
            .ok_or_else(|| Error::Config(format!("no peripheral with index {p}")))?;
        match &per.membership {
            Membership::Syllable => {
                if !self.free_basis {
                    return Err(Error::Unsupported(format!(
                        "syllable membership for `{}` needs a free basis declaration",
                        per.id
                    )));
                }
                let w = free_reduce(&g.word);
                Ok(w.iter().all(|s| per.generators.contains(&s.generator())))
            }
            Membership::FixedVector(v) => Ok(g.matrix.apply(v) == *v),
            Membership::Undeclared => Err(Error::Unsupported(format!(
                "no membership procedure declared for peripheral `{}`",
                per.id
            ))),
        }
    }
}
