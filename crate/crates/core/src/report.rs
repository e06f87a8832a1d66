//! Named pass/fail certificates.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

/// One checked inequality or identity. Both sides are base-2 exponents unless the
/// name says otherwise.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub name: String,
    pub index: i64,
    #[serde(rename = "lhs")]
    pub lhs_exponent: String,
    #[serde(rename = "rhs")]
    pub rhs_exponent: String,
    pub pass: bool,
}

impl Certificate {
    pub fn new(name: &str, index: i64, lhs: impl fmt::Display, rhs: impl fmt::Display, pass: bool) -> Self {
        Certificate { name: name.into(), index, lhs_exponent: lhs.to_string(), rhs_exponent: rhs.to_string(), pass }
    }

    /// `lhs ≥ rhs` on integer exponents.
    pub fn ge(name: &str, index: i64, lhs: &BigInt, rhs: &BigInt) -> Self {
        Certificate::new(name, index, lhs, rhs, lhs >= rhs)
    }

    /// `lhs > rhs` on integer exponents.
    pub fn gt(name: &str, index: i64, lhs: &BigInt, rhs: &BigInt) -> Self {
        Certificate::new(name, index, lhs, rhs, lhs > rhs)
    }

    /// `lhs = rhs` on integer exponents.
    pub fn eq(name: &str, index: i64, lhs: &BigInt, rhs: &BigInt) -> Self {
        Certificate::new(name, index, lhs, rhs, lhs == rhs)
    }

    /// `lhs ≥ rhs` on rational exponents.
    pub fn ge_q(name: &str, index: i64, lhs: &BigRational, rhs: &BigRational) -> Self {
        Certificate::new(name, index, lhs, rhs, lhs >= rhs)
    }
}

/// An ordered list of certificates.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct CertificateReport(pub Vec<Certificate>);

impl CertificateReport {
    pub fn push(&mut self, c: Certificate) {
        self.0.push(c);
    }

    pub fn extend(&mut self, o: CertificateReport) {
        self.0.extend(o.0);
    }

    pub fn all_pass(&self) -> bool {
        self.0.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Certificate> {
        self.0.iter().filter(|c| !c.pass)
    }

    pub fn named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Certificate> + 'a {
        self.0.iter().filter(move |c| c.name == name)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}
