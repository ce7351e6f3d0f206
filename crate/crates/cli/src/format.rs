//! Text formats for keys, key-generation parameters, ciphertexts and messages.
//!
//! Key files are line oriented:
//!
//! ```text
//! mkcrypt-key v1
//! scheme=original
//! role=public
//! p=a13
//! s=68,68,68,68,68
//! u=875,7a6,539,5f,be
//! ```
//!
//! Integers are canonical lowercase hex (no prefix, no leading zeros) so that
//! parsing and serializing are exact inverses.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, ensure, Context, Result};
use mkcrypt_core::numtheory::{PrimeSequence, SuperIncreasingSeq};
use mkcrypt_core::{modified, original, BigUint, BitVector};
use num_traits::Num;

pub const KEY_HEADER: &str = "mkcrypt-key v1";
pub const PARAMS_HEADER: &str = "mkcrypt-params v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SchemeTag {
    Original,
    Modified,
}

impl SchemeTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeTag::Original => "original",
            SchemeTag::Modified => "modified",
        }
    }
}

impl FromStr for SchemeTag {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(SchemeTag::Original),
            "modified" => Ok(SchemeTag::Modified),
            other => bail!("unknown scheme `{other}`"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Public,
    Secret,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::Public => "public",
            Role::Secret => "secret",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KeyFile {
    OriginalPublic(original::PublicKey),
    OriginalSecret(original::SecretKey),
    ModifiedPublic(modified::PublicKey),
    ModifiedSecret(modified::SecretKey),
}

pub fn to_hex(v: &BigUint) -> String {
    v.to_str_radix(16)
}

/// Strict inverse of [`to_hex`].
pub fn from_hex(s: &str) -> Result<BigUint> {
    ensure!(!s.is_empty(), "empty hex value");
    ensure!(
        s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b)),
        "`{s}` is not lowercase hex"
    );
    ensure!(s == "0" || !s.starts_with('0'), "`{s}` has leading zeros");
    Ok(BigUint::from_str_radix(s, 16).expect("validated digits"))
}

fn hex_array<'a>(values: impl IntoIterator<Item = &'a BigUint>) -> String {
    values.into_iter().map(to_hex).collect::<Vec<_>>().join(",")
}

fn parse_hex_array(s: &str) -> Result<Vec<BigUint>> {
    s.split(',').map(from_hex).collect()
}

/// Header line plus `key=value` fields, in file order.
struct Record {
    fields: BTreeMap<String, String>,
}

impl Record {
    fn parse(text: &str, header: &str) -> Result<Self> {
        let mut lines = text.lines();
        let first = lines.next().ok_or_else(|| anyhow!("empty file"))?;
        ensure!(first == header, "expected header `{header}`, found `{first}`");
        let mut fields = BTreeMap::new();
        for (i, line) in lines.enumerate() {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key=value", i + 2))?;
            ensure!(
                fields.insert(key.to_string(), value.to_string()).is_none(),
                "line {}: duplicate field `{key}`",
                i + 2
            );
        }
        Ok(Record { fields })
    }

    fn take(&mut self, key: &str) -> Result<String> {
        self.fields.remove(key).ok_or_else(|| anyhow!("missing field `{key}`"))
    }

    fn int(&mut self, key: &str) -> Result<BigUint> {
        from_hex(&self.take(key)?).with_context(|| format!("field `{key}`"))
    }

    fn ints(&mut self, key: &str) -> Result<Vec<BigUint>> {
        parse_hex_array(&self.take(key)?).with_context(|| format!("field `{key}`"))
    }

    fn finish(self) -> Result<()> {
        match self.fields.keys().next() {
            Some(extra) => bail!("unexpected field `{extra}`"),
            None => Ok(()),
        }
    }
}

fn write_lines(header: &str, fields: &[(&str, String)]) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for (k, v) in fields {
        out.push_str(k);
        out.push('=');
        out.push_str(v);
        out.push('\n');
    }
    out
}

fn public_pairs(s: Vec<BigUint>, u: Vec<BigUint>) -> Result<Vec<(BigUint, BigUint)>> {
    ensure!(s.len() == u.len(), "s has {} entries but u has {}", s.len(), u.len());
    Ok(s.into_iter().zip(u).collect())
}

impl KeyFile {
    pub fn scheme(&self) -> SchemeTag {
        match self {
            KeyFile::OriginalPublic(_) | KeyFile::OriginalSecret(_) => SchemeTag::Original,
            KeyFile::ModifiedPublic(_) | KeyFile::ModifiedSecret(_) => SchemeTag::Modified,
        }
    }

    pub fn role(&self) -> Role {
        match self {
            KeyFile::OriginalPublic(_) | KeyFile::ModifiedPublic(_) => Role::Public,
            KeyFile::OriginalSecret(_) | KeyFile::ModifiedSecret(_) => Role::Secret,
        }
    }

    pub fn serialize(&self) -> String {
        let mut fields = vec![("scheme", self.scheme().as_str().to_string()), ("role", self.role().as_str().to_string())];
        match self {
            KeyFile::OriginalPublic(pk) => {
                fields.push(("p", to_hex(pk.modulus())));
                fields.push(("s", hex_array(pk.pairs().iter().map(|(s, _)| s))));
                fields.push(("u", hex_array(pk.u())));
            }
            KeyFile::ModifiedPublic(pk) => {
                fields.push(("p", to_hex(pk.modulus())));
                fields.push(("s", hex_array(pk.pairs().iter().map(|(s, _)| s))));
                fields.push(("u", hex_array(pk.u())));
            }
            KeyFile::OriginalSecret(sk) => {
                fields.extend([("p", &sk.p), ("g", &sk.g), ("y", &sk.y), ("x", &sk.x), ("k", &sk.k)].map(|(k, v)| (k, to_hex(v))));
                fields.push(("a", hex_array(sk.a.as_slice())));
            }
            KeyFile::ModifiedSecret(sk) => {
                fields.extend([("p", &sk.p), ("g", &sk.g), ("y", &sk.y), ("x", &sk.x), ("k", &sk.k)].map(|(k, v)| (k, to_hex(v))));
                fields.push(("primes", hex_array(sk.primes.as_slice())));
            }
        }
        write_lines(KEY_HEADER, &fields)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut rec = Record::parse(text, KEY_HEADER)?;
        let scheme: SchemeTag = rec.take("scheme")?.parse()?;
        let role = rec.take("role")?;
        let key = match (scheme, role.as_str()) {
            (SchemeTag::Original, "public") => {
                let (p, s, u) = (rec.int("p")?, rec.ints("s")?, rec.ints("u")?);
                KeyFile::OriginalPublic(original::PublicKey::new(p, public_pairs(s, u)?)?)
            }
            (SchemeTag::Modified, "public") => {
                let (p, s, u) = (rec.int("p")?, rec.ints("s")?, rec.ints("u")?);
                KeyFile::ModifiedPublic(modified::PublicKey::new(p, public_pairs(s, u)?)?)
            }
            (SchemeTag::Original, "secret") => {
                let (p, g, y, x, k) = (rec.int("p")?, rec.int("g")?, rec.int("y")?, rec.int("x")?, rec.int("k")?);
                let a = SuperIncreasingSeq::new(rec.ints("a")?)?;
                KeyFile::OriginalSecret(original::SecretKey::new(p, g, y, x, k, a)?)
            }
            (SchemeTag::Modified, "secret") => {
                let (p, g, y, x, k) = (rec.int("p")?, rec.int("g")?, rec.int("y")?, rec.int("x")?, rec.int("k")?);
                let primes = PrimeSequence::new(rec.ints("primes")?)?;
                KeyFile::ModifiedSecret(modified::SecretKey::new(p, g, y, x, k, primes)?)
            }
            (_, other) => bail!("unknown role `{other}`"),
        };
        rec.finish()?;
        Ok(key)
    }
}

/// Fixed key material for reproducing a published key: everything but `y`,
/// which key generation derives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedKeyParams {
    pub scheme: SchemeTag,
    pub p: BigUint,
    pub g: BigUint,
    pub x: BigUint,
    pub k: BigUint,
    pub sequence: Vec<BigUint>,
}

impl FixedKeyParams {
    fn sequence_field(scheme: SchemeTag) -> &'static str {
        match scheme {
            SchemeTag::Original => "a",
            SchemeTag::Modified => "primes",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut rec = Record::parse(text, PARAMS_HEADER)?;
        let scheme: SchemeTag = rec.take("scheme")?.parse()?;
        let params = FixedKeyParams {
            scheme,
            p: rec.int("p")?,
            g: rec.int("g")?,
            x: rec.int("x")?,
            k: rec.int("k")?,
            sequence: rec.ints(Self::sequence_field(scheme))?,
        };
        rec.finish()?;
        Ok(params)
    }

    pub fn serialize(&self) -> String {
        let mut fields = vec![("scheme", self.scheme.as_str().to_string())];
        fields.extend([("p", &self.p), ("g", &self.g), ("x", &self.x), ("k", &self.k)].map(|(k, v)| (k, to_hex(v))));
        fields.push((Self::sequence_field(self.scheme), hex_array(&self.sequence)));
        write_lines(PARAMS_HEADER, &fields)
    }

    /// Builds the secret key, deriving `y = g^x mod p`.
    pub fn into_key(self) -> Result<KeyFile> {
        let FixedKeyParams { scheme, p, g, x, k, sequence } = self;
        Ok(match scheme {
            SchemeTag::Original => {
                let a = SuperIncreasingSeq::new(sequence)?;
                KeyFile::OriginalSecret(original::SecretKey::from_parts(p, g, x, k, a)?)
            }
            SchemeTag::Modified => {
                let y = mkcrypt_core::numtheory::mod_pow(&g, &x, &p)?;
                let primes = PrimeSequence::new(sequence)?;
                KeyFile::ModifiedSecret(modified::SecretKey::new(p, g, y, x, k, primes)?)
            }
        })
    }
}

/// A decimal integer, or hex with a `0x` prefix.
pub fn parse_integer(s: &str) -> Result<BigUint> {
    let parsed = match s.strip_prefix("0x") {
        Some(hex) => BigUint::from_str_radix(hex, 16),
        None => BigUint::from_str_radix(s, 10),
    };
    parsed.map_err(|_| anyhow!("`{s}` is not a decimal or 0x-hex integer"))
}

/// How ciphertext integers are printed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Radix {
    #[default]
    Decimal,
    Hex,
}

pub fn format_integer(v: &BigUint, radix: Radix) -> String {
    match radix {
        Radix::Decimal => v.to_string(),
        Radix::Hex => format!("0x{}", to_hex(v)),
    }
}

/// Whitespace-separated ciphertext components in either scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CiphertextText {
    Original(original::Ciphertext),
    Modified(modified::Ciphertext),
}

impl CiphertextText {
    pub fn parse(text: &str, scheme: SchemeTag) -> Result<Self> {
        let parts: Vec<BigUint> = text.split_whitespace().map(parse_integer).collect::<Result<_>>()?;
        match (scheme, parts.as_slice()) {
            (SchemeTag::Original, [c1, c2]) => Ok(CiphertextText::Original(original::Ciphertext { c1: c1.clone(), c2: c2.clone() })),
            (SchemeTag::Modified, [a, b, c]) => Ok(CiphertextText::Modified(modified::Ciphertext {
                c1_prime: a.clone(),
                c1_dprime: b.clone(),
                c2: c.clone(),
            })),
            (SchemeTag::Original, _) => bail!("original ciphertexts have 2 components, found {}", parts.len()),
            (SchemeTag::Modified, _) => bail!("modified ciphertexts have 3 components, found {}", parts.len()),
        }
    }

    pub fn render(&self, radix: Radix) -> String {
        let parts: Vec<&BigUint> = match self {
            CiphertextText::Original(ct) => vec![&ct.c1, &ct.c2],
            CiphertextText::Modified(ct) => vec![&ct.c1_prime, &ct.c1_dprime, &ct.c2],
        };
        parts.into_iter().map(|v| format_integer(v, radix)).collect::<Vec<_>>().join(" ")
    }
}

impl fmt::Display for CiphertextText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(Radix::Decimal))
    }
}

pub fn parse_bits(s: &str) -> Result<BitVector> {
    s.parse().map_err(|e| anyhow!("`{s}` is not a bit string: {e}"))
}
