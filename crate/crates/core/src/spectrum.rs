//! Exact interval centers, their equality grouping, orbit closures for
//! rational centers, and the independence criterion on target intervals.
//!
//! Centers are symbols, not floats: either an exact rational `p/q` or a
//! named irrational constant resolved through [`IrrationalRegistry`].
//! Equality of symbols is decidable (same reduced rational, or same tag);
//! no attempt is made to detect hidden rational relations between distinct
//! irrational tags.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::RwLock;

use num::integer::lcm;
use num::rational::Rational64;
use num::Zero;
use once_cell::sync::Lazy;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::counting::IntervalSpec;
use crate::error::{Error, Result};

/// A named irrational constant: a stable identity tag plus its value mod 1.
pub trait IrrationalConstant: Send + Sync {
    fn tag(&self) -> &str;
    /// Value reduced to [0,1).
    fn value_mod_one(&self) -> f64;
}

struct NamedConstant {
    tag: &'static str,
    value: f64,
}

impl IrrationalConstant for NamedConstant {
    fn tag(&self) -> &str {
        self.tag
    }
    fn value_mod_one(&self) -> f64 {
        self.value
    }
}

/// Registry of named irrational evaluators, keyed by tag.
///
/// The builtin table covers `sqrt2`, `sqrt3`, `golden`, `e`, `pi-frac`;
/// more constants can be registered at runtime and are then accepted by
/// the `irr:<tag>` config syntax.
pub struct IrrationalRegistry {
    entries: RwLock<BTreeMap<String, Box<dyn IrrationalConstant>>>,
}

impl IrrationalRegistry {
    fn with_builtins() -> Self {
        let reg = IrrationalRegistry {
            entries: RwLock::new(BTreeMap::new()),
        };
        let builtins: [(&'static str, f64); 5] = [
            ("sqrt2", std::f64::consts::SQRT_2 - 1.0),
            ("sqrt3", 3.0_f64.sqrt() - 1.0),
            // golden ratio (1+sqrt(5))/2 mod 1
            ("golden", (1.0 + 5.0_f64.sqrt()) / 2.0 - 1.0),
            ("e", std::f64::consts::E - 2.0),
            ("pi-frac", std::f64::consts::PI - 3.0),
        ];
        for (tag, value) in builtins {
            reg.register(Box::new(NamedConstant { tag, value }));
        }
        reg
    }

    /// The process-wide registry used by the `irr:<tag>` syntax.
    pub fn global() -> &'static IrrationalRegistry {
        static GLOBAL: Lazy<IrrationalRegistry> = Lazy::new(IrrationalRegistry::with_builtins);
        &GLOBAL
    }

    /// Register (or replace) a constant under its tag.
    pub fn register(&self, constant: Box<dyn IrrationalConstant>) {
        let tag = constant.tag().to_owned();
        self.entries.write().unwrap().insert(tag, constant);
    }

    pub fn lookup(&self, tag: &str) -> Result<f64> {
        let entries = self.entries.read().unwrap();
        let c = entries
            .get(tag)
            .ok_or_else(|| Error::UnknownIrrational(tag.to_owned()))?;
        let v = c.value_mod_one();
        Ok(v.rem_euclid(1.0))
    }

    pub fn tags(&self) -> Vec<String> {
        self.entries.read().unwrap().keys().cloned().collect()
    }
}

/// An exact interval center on R/Z.
///
/// Textual syntax: `p/q` (or a bare integer) for rationals, `irr:<tag>`
/// for registered irrationals. Rationals are reduced and wrapped to [0,1).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CenterSymbol {
    Rational(Rational64),
    Irrational { tag: String },
}

impl CenterSymbol {
    pub fn rational(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::UnknownSymbol(format!("{num}/0")));
        }
        let r = Rational64::new(num, den);
        Ok(CenterSymbol::Rational(wrap_unit(r)))
    }

    pub fn irrational(tag: &str) -> Result<Self> {
        IrrationalRegistry::global().lookup(tag)?;
        Ok(CenterSymbol::Irrational {
            tag: tag.to_owned(),
        })
    }

    /// Numeric value in [0,1).
    pub fn value(&self) -> f64 {
        match self {
            CenterSymbol::Rational(r) => {
                (*r.numer() as f64 / *r.denom() as f64).rem_euclid(1.0)
            }
            CenterSymbol::Irrational { tag } => IrrationalRegistry::global()
                .lookup(tag)
                .expect("tag was validated at construction"),
        }
    }

    pub fn as_rational(&self) -> Option<Rational64> {
        match self {
            CenterSymbol::Rational(r) => Some(*r),
            CenterSymbol::Irrational { .. } => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, CenterSymbol::Rational(_))
    }
}

fn wrap_unit(r: Rational64) -> Rational64 {
    let one = Rational64::new(1, 1);
    let mut x = r - (r.floor());
    if x >= one {
        x -= one;
    }
    if x < Rational64::zero() {
        x += one;
    }
    x
}

impl fmt::Display for CenterSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CenterSymbol::Rational(r) => {
                if *r.denom() == 1 {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            CenterSymbol::Irrational { tag } => write!(f, "irr:{tag}"),
        }
    }
}

impl FromStr for CenterSymbol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(tag) = s.strip_prefix("irr:") {
            return CenterSymbol::irrational(tag);
        }
        if let Some((p, q)) = s.split_once('/') {
            let p: i64 = p
                .trim()
                .parse()
                .map_err(|_| Error::UnknownSymbol(s.to_owned()))?;
            let q: i64 = q
                .trim()
                .parse()
                .map_err(|_| Error::UnknownSymbol(s.to_owned()))?;
            if q == 0 {
                return Err(Error::UnknownSymbol(s.to_owned()));
            }
            return CenterSymbol::rational(p, q);
        }
        let p: i64 = s.parse().map_err(|_| Error::UnknownSymbol(s.to_owned()))?;
        CenterSymbol::rational(p, 1)
    }
}

impl Serialize for CenterSymbol {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CenterSymbol {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Group indices of equal center symbols, in order of first appearance.
pub fn group_centers(xis: &[CenterSymbol]) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut index_of: BTreeMap<&CenterSymbol, usize> = BTreeMap::new();
    for (i, xi) in xis.iter().enumerate() {
        match index_of.get(xi) {
            Some(&g) => groups[g].push(i),
            None => {
                index_of.insert(xi, groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// One factor of an orbit closure, attached to an equality class of centers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassGroup {
    /// Finite cyclic group of the given order (class of a rational center).
    Cyclic { order: u64 },
    /// A circle, embedded diagonally in the class coordinates.
    Circle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitKind {
    FiniteCyclic { order: u64 },
    FullTorus,
    Product,
}

/// Closure of the rotation orbit Z*xi in the n-torus, described per
/// equality class. Distinct irrational tags are treated as jointly
/// independent; detecting hidden rational relations is out of scope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitClosure {
    pub kind: OrbitKind,
    pub classes: Vec<(Vec<usize>, ClassGroup)>,
    /// Generator (the center vector itself) for all-rational inputs.
    pub generator: Option<Vec<CenterSymbol>>,
}

impl OrbitClosure {
    pub fn order(&self) -> Option<u64> {
        match self.kind {
            OrbitKind::FiniteCyclic { order } => Some(order),
            _ => None,
        }
    }
}

/// Orbit closure for an all-rational center vector: the cyclic group of
/// order lcm of the reduced denominators, generated by the vector itself.
pub fn orbit_closure_rational(xis: &[CenterSymbol]) -> Result<OrbitClosure> {
    let mut rats = Vec::with_capacity(xis.len());
    for xi in xis {
        match xi.as_rational() {
            Some(r) => rats.push(r),
            None => return Err(Error::NotRational(xi.to_string())),
        }
    }
    let order = rats
        .iter()
        .fold(1u64, |acc, r| lcm(acc, (*r.denom()).unsigned_abs()));
    let classes = group_centers(xis)
        .into_iter()
        .map(|idx| {
            let q = xis[idx[0]]
                .as_rational()
                .map(|r| (*r.denom()).unsigned_abs())
                .unwrap_or(1);
            (idx, ClassGroup::Cyclic { order: q })
        })
        .collect();
    Ok(OrbitClosure {
        kind: OrbitKind::FiniteCyclic { order },
        classes,
        generator: Some(xis.to_vec()),
    })
}

/// Orbit closure described per equality class (rational classes are exact;
/// irrational classes contribute a diagonal circle each).
pub fn orbit_closure(xis: &[CenterSymbol]) -> OrbitClosure {
    if xis.iter().all(CenterSymbol::is_rational) {
        return orbit_closure_rational(xis).expect("all rational");
    }
    let groups = group_centers(xis);
    let mut classes = Vec::with_capacity(groups.len());
    let mut all_irrational_singletons = true;
    for idx in groups {
        let factor = match xis[idx[0]].as_rational() {
            Some(r) => {
                all_irrational_singletons = false;
                ClassGroup::Cyclic {
                    order: (*r.denom()).unsigned_abs(),
                }
            }
            None => {
                if idx.len() > 1 {
                    all_irrational_singletons = false;
                }
                ClassGroup::Circle
            }
        };
        classes.push((idx, factor));
    }
    OrbitClosure {
        kind: if all_irrational_singletons {
            OrbitKind::FullTorus
        } else {
            OrbitKind::Product
        },
        classes,
        generator: None,
    }
}

/// Offsets tau reduced modulo (1/q)Z per coordinate, for rational centers
/// of common order q. Reported as metadata only.
pub fn tau_mod_closure(taus: &[f64], order: u64) -> Vec<f64> {
    let step = 1.0 / order as f64;
    taus.iter().map(|t| t.rem_euclid(step)).collect()
}

/// True iff the open intervals `(lo_a, hi_a)` and `(lo_b, hi_b)` are disjoint.
pub fn open_intervals_disjoint(lo_a: f64, hi_a: f64, lo_b: f64, hi_b: f64) -> bool {
    hi_a <= lo_b || hi_b <= lo_a
}

/// The arithmetic-obstruction criterion: the large-d limit is a product of
/// independent Poisson laws iff every pair of intervals with equal centers
/// has disjoint open offset windows (tau, tau+sigma).
pub fn independence_predicate(intervals: &[IntervalSpec]) -> bool {
    for (j, a) in intervals.iter().enumerate() {
        for b in intervals.iter().skip(j + 1) {
            if a.xi == b.xi
                && !open_intervals_disjoint(a.tau, a.tau + a.sigma, b.tau, b.tau + b.sigma)
            {
                return false;
            }
        }
    }
    true
}
