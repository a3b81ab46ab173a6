//! Normal forms of V-diagrams modulo the one- and two-term relations, and the
//! orthogonal projection onto the weight-system space.
//!
//! A V whose triple contains adjacent positions `i, i+1` satisfies
//! `D(mid i) = −D(mid i+1)`; chaining these identities, every V-diagram is
//! ± the diagram whose mid is the lowest position of its adjacency class.
//! Diagrams with an ordinary chord on adjacent positions vanish.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_traits::ToPrimitive;

use crate::diagrams::{enumerate, Diagram, Kind, Vee};
use crate::error::{Error, Result};
use crate::ratlinalg::Q;
use crate::relations::weight_system_basis;

/// `Some((representative, ±1))`, or `None` when the diagram vanishes by 1T.
pub fn normal_form(d: &Diagram) -> Option<(Diagram, i8)> {
    if d.has_isolated_chord() {
        return None;
    }
    match d.kind() {
        Kind::D0 => Some((d.clone(), 1)),
        Kind::D1 => {
            let v = d.vees()[0];
            let t = v.points();
            let idx = t.iter().position(|&p| p == v.mid).expect("mid in triple");
            let mut lowest = idx;
            while lowest > 0 && t[lowest - 1] + 1 == t[lowest] {
                lowest -= 1;
            }
            if lowest == idx {
                return Some((d.clone(), 1));
            }
            let mid = t[lowest];
            let tips: Vec<_> = t.iter().copied().filter(|&p| p != mid).collect();
            let rep = Diagram::with_vees(d.chord_list(), &[Vee::new(mid, tips[0], tips[1])]).expect("same points");
            Some((rep, if (idx - lowest) % 2 == 0 { 1 } else { -1 }))
        }
        _ => None,
    }
}

/// Normal-form representatives of a kind and degree, in canonical order.
pub fn representatives(kind: Kind, degree: usize) -> Result<Vec<Diagram>> {
    Ok(enumerate(kind, degree)?
        .into_iter()
        .filter(|d| matches!(normal_form(d), Some((r, 1)) if &r == d))
        .collect())
}

/// Index of every diagram of a graded basis.
#[derive(Clone, Debug, Default)]
pub struct Basis {
    pub diagrams: Vec<Diagram>,
    index: BTreeMap<Diagram, usize>,
}

impl Basis {
    pub fn new(diagrams: Vec<Diagram>) -> Self {
        let index = diagrams.iter().enumerate().map(|(i, d)| (d.clone(), i)).collect();
        Self { diagrams, index }
    }

    /// Representatives of `kind` in every degree of `degrees`.
    pub fn of_representatives(kind: Kind, degrees: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut all = Vec::new();
        for m in degrees {
            all.extend(representatives(kind, m)?);
        }
        Ok(Self::new(all))
    }

    pub fn len(&self) -> usize {
        self.diagrams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagrams.is_empty()
    }

    pub fn get(&self, d: &Diagram) -> Option<usize> {
        self.index.get(d).copied()
    }

    /// Index and sign of the normal form of `d`, if it survives 1T and lies
    /// in the basis.
    pub fn locate(&self, d: &Diagram) -> Option<(usize, f64)> {
        let (rep, s) = normal_form(d)?;
        self.get(&rep).map(|i| (i, f64::from(s)))
    }
}

/// Orthonormal basis (over all V-diagrams of a degree) of the weight systems.
pub struct WeightSpace {
    pub degree: usize,
    pub diagrams: Vec<Diagram>,
    /// Rows orthonormal in the standard inner product on diagram coordinates.
    pub orthonormal: Vec<Vec<f64>>,
    /// The exact basis returned by the elimination.
    pub exact: Vec<Vec<Q>>,
}

fn build_weight_space(degree: usize) -> Result<WeightSpace> {
    let diagrams = enumerate(Kind::D1, degree)?;
    let exact: Vec<Vec<Q>> = weight_system_basis(degree)?
        .iter()
        .map(|w| diagrams.iter().map(|d| w.coeff(d)).collect())
        .collect();
    let mut orthonormal: Vec<Vec<f64>> = Vec::new();
    for v in &exact {
        let mut u: Vec<f64> = v.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
        // Two passes of modified Gram–Schmidt for stability.
        for _ in 0..2 {
            for e in &orthonormal {
                let c: f64 = u.iter().zip(e).map(|(a, b)| a * b).sum();
                u.iter_mut().zip(e).for_each(|(a, b)| *a -= c * b);
            }
        }
        let n = u.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !(n > 1e-12) {
            return Err(Error::Malformed("dependent weight-system basis".into()));
        }
        orthonormal.push(u.into_iter().map(|a| a / n).collect());
    }
    Ok(WeightSpace { degree, diagrams, orthonormal, exact })
}

/// Cached weight spaces in degrees 2 and 3.
pub fn weight_space(degree: usize) -> Result<&'static WeightSpace> {
    static CACHE: [OnceLock<std::result::Result<WeightSpace, Error>>; 2] = [OnceLock::new(), OnceLock::new()];
    if !(2..=3).contains(&degree) {
        return Err(Error::Unsupported(format!("weight space of degree {degree}")));
    }
    CACHE[degree - 2].get_or_init(|| build_weight_space(degree)).as_ref().map_err(Clone::clone)
}
