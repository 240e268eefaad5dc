//! Group/representation description files (TOML, schema version 1).
//!
//! ```toml
//! schema_version = 1
//! name = "pingpong"
//! faithful = true
//! free_basis = true
//! relatively_hyperbolic = true
//!
//! [[generators]]
//! name = "a"
//! matrix = [["13/5", "12/5"], ["12/5", "13/5"]]
//!
//! [[peripherals]]
//! id = "P_b"
//! generators = ["b"]
//! membership = "syllable"          # or "fixed-vector" (+ fixed_vector) or "none"
//!
//! [representation]
//! kind = "symmetric-power"         # "identity" | "symmetric-power" | "explicit"
//! power = 2
//! # explicit: images = { a = [[...]], b = [[...]] }
//!
//! [certificate]                    # optional ping-pong certificate
//! hyperbolic = "a"
//! attracting = ["2/3", "3/2"]
//! repelling = ["-3/2", "-2/3"]
//! parabolic = "b"
//! half_width = "2"
//! ```

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::builtin::{Interval, PingPongCertificate};
use super::{Group, Membership, PeripheralSubgroup, RatMatrix, Representation};
use crate::error::{Error, Result};

pub const GROUP_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    pub schema_version: u32,
    pub name: String,
    pub faithful: bool,
    #[serde(default)]
    pub free_basis: bool,
    #[serde(default)]
    pub relatively_hyperbolic: bool,
    pub generators: Vec<GeneratorSpec>,
    #[serde(default)]
    pub peripherals: Vec<PeripheralSpec>,
    #[serde(default)]
    pub representation: Option<RepresentationSpec>,
    #[serde(default)]
    pub certificate: Option<CertificateSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub name: String,
    pub matrix: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PeripheralSpec {
    pub id: String,
    pub generators: Vec<String>,
    pub membership: String,
    #[serde(default)]
    pub fixed_vector: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RepresentationSpec {
    pub kind: String,
    #[serde(default)]
    pub power: Option<usize>,
    #[serde(default)]
    pub images: Option<BTreeMap<String, Vec<Vec<String>>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CertificateSpec {
    pub hyperbolic: String,
    pub attracting: [String; 2],
    pub repelling: [String; 2],
    pub parabolic: String,
    pub half_width: String,
}

fn rational(s: &str) -> Result<BigRational> {
    BigRational::from_str(s.trim()).map_err(|_| Error::Config(format!("bad rational `{s}`")))
}

impl GroupFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        let f: GroupFile = toml::from_str(text)?;
        if f.schema_version != GROUP_SCHEMA_VERSION {
            return Err(Error::SchemaMismatch(format!(
                "group file schema {} (supported: {GROUP_SCHEMA_VERSION})",
                f.schema_version
            )));
        }
        Ok(f)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path.as_ref(), e))?;
        Self::from_toml(&text)
    }

    pub fn build(&self) -> Result<(Group, Representation)> {
        let names: Vec<String> = self.generators.iter().map(|g| g.name.clone()).collect();
        let matrices = self
            .generators
            .iter()
            .map(|g| RatMatrix::parse(&g.matrix))
            .collect::<Result<Vec<_>>>()?;
        let gen_index = |n: &str| {
            names
                .iter()
                .position(|x| x == n)
                .ok_or_else(|| Error::Config(format!("unknown generator `{n}`")))
        };
        let mut peripherals = Vec::new();
        for p in &self.peripherals {
            let generators = p.generators.iter().map(|n| gen_index(n)).collect::<Result<Vec<_>>>()?;
            let membership = match p.membership.as_str() {
                "syllable" => Membership::Syllable,
                "fixed-vector" => {
                    let v = p
                        .fixed_vector
                        .as_ref()
                        .ok_or_else(|| Error::Config(format!("peripheral `{}` needs fixed_vector", p.id)))?;
                    Membership::FixedVector(v.iter().map(|s| rational(s)).collect::<Result<_>>()?)
                }
                "none" => Membership::Undeclared,
                other => return Err(Error::Config(format!("unknown membership procedure `{other}`"))),
            };
            peripherals.push(PeripheralSubgroup { id: p.id.clone(), generators, membership });
        }
        let mut group = Group::new(self.name.clone(), names.clone(), matrices, peripherals, self.faithful, false)?;
        group.relatively_hyperbolic_asserted = self.relatively_hyperbolic;
        if let Some(c) = &self.certificate {
            let cert = PingPongCertificate {
                hyperbolic: gen_index(&c.hyperbolic)?,
                attracting: Interval { lo: rational(&c.attracting[0])?, hi: rational(&c.attracting[1])? },
                repelling: Interval { lo: rational(&c.repelling[0])?, hi: rational(&c.repelling[1])? },
                parabolic: gen_index(&c.parabolic)?,
                half_width: rational(&c.half_width)?,
            };
            cert.verify(&group)?;
            group.free_basis = true;
        } else {
            group.free_basis = self.free_basis;
        }
        let rep = match &self.representation {
            None => Representation::identity(&group),
            Some(r) => match r.kind.as_str() {
                "identity" => Representation::identity(&group),
                "symmetric-power" => {
                    let n = r.power.ok_or_else(|| Error::Config("symmetric-power needs `power`".into()))?;
                    Representation::symmetric_power(&group, n)?
                }
                "explicit" => {
                    let images = r.images.as_ref().ok_or_else(|| Error::Config("explicit needs `images`".into()))?;
                    let mut ordered = Vec::new();
                    for n in &names {
                        let m = images
                            .get(n)
                            .ok_or_else(|| Error::Config(format!("no image for generator `{n}`")))?;
                        ordered.push(RatMatrix::parse(m)?);
                    }
                    if images.len() != names.len() {
                        return Err(Error::Config("images for undeclared generators".into()));
                    }
                    Representation::explicit(format!("{}:explicit", self.name), &group, ordered)?
                }
                other => return Err(Error::Config(format!("unknown representation kind `{other}`"))),
            },
        };
        Ok((group, rep))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PINGPONG: &str = r#"
schema_version = 1
name = "pingpong"
faithful = true
relatively_hyperbolic = true

[[generators]]
name = "a"
matrix = [["13/5", "12/5"], ["12/5", "13/5"]]

[[generators]]
name = "b"
matrix = [["1", "4"], ["0", "1"]]

[[peripherals]]
id = "P_b"
generators = ["b"]
membership = "syllable"

[representation]
kind = "symmetric-power"
power = 2

[certificate]
hyperbolic = "a"
attracting = ["2/3", "3/2"]
repelling = ["-3/2", "-2/3"]
parabolic = "b"
half_width = "2"
"#;

    #[test]
    fn parses_and_certifies() {
        let f = GroupFile::from_toml(PINGPONG).unwrap();
        let (g, r) = f.build().unwrap();
        assert!(g.free_basis);
        assert!(g.relatively_hyperbolic_asserted);
        assert_eq!(r.dim, 3);
        let ab = g.parse_element("a b").unwrap();
        assert!(!g.peripheral_membership(&ab, 0).unwrap());
    }

    #[test]
    fn rejects_wrong_schema_and_fields() {
        let bad = PINGPONG.replace("schema_version = 1", "schema_version = 2");
        assert!(matches!(GroupFile::from_toml(&bad), Err(Error::SchemaMismatch(_))));
        let bad = PINGPONG.replace("faithful = true", "faithful = true\ncolour = 3");
        assert!(GroupFile::from_toml(&bad).is_err());
        let bad = PINGPONG.replace("half_width = \"2\"", "half_width = \"3\"");
        assert!(GroupFile::from_toml(&bad).unwrap().build().is_err());
    }

    #[test]
    fn explicit_images() {
        let text = PINGPONG.replace(
            "kind = \"symmetric-power\"\npower = 2",
            "kind = \"explicit\"\nimages = { a = [[\"13/5\", \"12/5\"], [\"12/5\", \"13/5\"]], b = [[\"1\", \"4\"], [\"0\", \"1\"]] }",
        );
        let (g, r) = GroupFile::from_toml(&text).unwrap().build().unwrap();
        let e = g.parse_element("a b a^-1").unwrap();
        assert_eq!(r.image(&e), e.matrix);
    }
}
