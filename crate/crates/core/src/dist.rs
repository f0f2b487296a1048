//! Finite discrete distributions and hyper-distributions.
//!
//! A [`Dist`] keeps only strictly positive entries in a sorted map, so two
//! distributions are semantically equal exactly when they are structurally
//! equal. A [`Hyper`] is a distribution over distributions; building it
//! through the map merges equal inners, which is the reduced form.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dist<T: Ord> {
    entries: BTreeMap<T, Rational>,
}

pub type Hyper<T> = Dist<Dist<T>>;

impl<T: Ord + Clone> Dist<T> {
    /// Builds a distribution, summing duplicates and pruning zeros.
    pub fn from_entries<I>(pairs: I) -> Result<Dist<T>>
    where
        I: IntoIterator<Item = (T, Rational)>,
    {
        let d = Dist::from_weights_unchecked(pairs)?;
        let total: Rational = d.entries.values().sum();
        if !total.is_one() {
            return Err(Error::SumNotOne(total));
        }
        Ok(d)
    }

    fn from_weights_unchecked<I>(pairs: I) -> Result<Dist<T>>
    where
        I: IntoIterator<Item = (T, Rational)>,
    {
        let mut entries: BTreeMap<T, Rational> = BTreeMap::new();
        for (k, p) in pairs {
            if p.is_negative() {
                return Err(Error::NegativeProbability(p));
            }
            if p.is_zero() {
                continue;
            }
            *entries.entry(k).or_insert_with(Rational::zero) += p;
        }
        Ok(Dist { entries })
    }

    /// Scales non-negative weights so they sum to one.
    pub fn normalized<I>(pairs: I) -> Result<Dist<T>>
    where
        I: IntoIterator<Item = (T, Rational)>,
    {
        let mut d = Dist::from_weights_unchecked(pairs)?;
        let total: Rational = d.entries.values().sum();
        if total.is_zero() {
            return Err(Error::SumNotOne(total));
        }
        if !total.is_one() {
            for p in d.entries.values_mut() {
                *p = &*p / &total;
            }
        }
        Ok(d)
    }

    pub fn point(x: T) -> Dist<T> {
        let mut entries = BTreeMap::new();
        entries.insert(x, Rational::one());
        Dist { entries }
    }

    /// Uniform over the distinct elements; errors on an empty support.
    pub fn uniform<I: IntoIterator<Item = T>>(xs: I) -> Result<Dist<T>> {
        Dist::normalized(xs.into_iter().map(|x| (x, Rational::one())))
    }

    pub fn prob(&self, x: &T) -> Rational {
        self.entries.get(x).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, &Rational)> {
        self.entries.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &T> {
        self.entries.keys()
    }

    pub fn is_point(&self) -> bool {
        self.entries.len() == 1
    }

    /// Push-forward through `f`.
    pub fn map<U: Ord + Clone>(&self, mut f: impl FnMut(&T) -> U) -> Dist<U> {
        let mut entries: BTreeMap<U, Rational> = BTreeMap::new();
        for (k, p) in &self.entries {
            *entries.entry(f(k)).or_insert_with(Rational::zero) += p;
        }
        Dist { entries }
    }

    pub fn try_map<U: Ord + Clone, E>(
        &self,
        mut f: impl FnMut(&T) -> std::result::Result<U, E>,
    ) -> std::result::Result<Dist<U>, E> {
        let mut entries: BTreeMap<U, Rational> = BTreeMap::new();
        for (k, p) in &self.entries {
            *entries.entry(f(k)?).or_insert_with(Rational::zero) += p;
        }
        Ok(Dist { entries })
    }

    /// `Σ d(x)·f(x)`.
    pub fn expectation(&self, mut f: impl FnMut(&T) -> Rational) -> Rational {
        self.entries.iter().map(|(k, p)| p * f(k)).sum()
    }

    pub fn try_expectation<E>(
        &self,
        mut f: impl FnMut(&T) -> std::result::Result<Rational, E>,
    ) -> std::result::Result<Rational, E> {
        let mut acc = Rational::zero();
        for (k, p) in &self.entries {
            acc += p * f(k)?;
        }
        Ok(acc)
    }

    /// Partitions by `key`, returning each class's marginal and posterior.
    pub fn split_by<K: Ord>(&self, mut key: impl FnMut(&T) -> K) -> Vec<(K, Rational, Dist<T>)> {
        let mut classes: BTreeMap<K, BTreeMap<T, Rational>> = BTreeMap::new();
        for (x, p) in &self.entries {
            classes.entry(key(x)).or_default().insert(x.clone(), p.clone());
        }
        classes
            .into_iter()
            .map(|(k, entries)| {
                let mass: Rational = entries.values().sum();
                let post = entries.into_iter().map(|(x, p)| (x, &p / &mass)).collect();
                (k, mass, Dist { entries: post })
            })
            .collect()
    }

    pub fn try_split_by<K: Ord, E>(
        &self,
        mut key: impl FnMut(&T) -> std::result::Result<K, E>,
    ) -> std::result::Result<Vec<(K, Rational, Dist<T>)>, E> {
        let mut keys = Vec::with_capacity(self.entries.len());
        for x in self.entries.keys() {
            keys.push(key(x)?);
        }
        let mut it = keys.into_iter();
        Ok(self.split_by(|_| it.next().expect("one key per entry")))
    }

    /// `λ·self + (1−λ)·other`.
    pub fn mix(&self, lambda: &Rational, other: &Dist<T>) -> Dist<T> {
        let mu = Rational::one() - lambda;
        let pairs = self
            .entries
            .iter()
            .map(|(k, p)| (k.clone(), p * lambda))
            .chain(other.entries.iter().map(|(k, p)| (k.clone(), p * &mu)));
        Dist::from_weights_unchecked(pairs).expect("convex weights are non-negative")
    }
}

impl<T: Ord + Clone> Dist<Dist<T>> {
    /// Re-reduces a raw list of weighted inners.
    pub fn reduce<I: IntoIterator<Item = (Dist<T>, Rational)>>(raw: I) -> Result<Hyper<T>> {
        Dist::from_entries(raw)
    }
}

impl<T: Ord + Clone> IntoIterator for Dist<T> {
    type Item = (T, Rational);
    type IntoIter = std::collections::btree_map::IntoIter<T, Rational>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.into_iter()
    }
}

impl<T: Ord + std::fmt::Debug> std::fmt::Debug for Dist<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_map().entries(self.entries.iter()).finish()
    }
}

/// The point hyper on `d`.
pub fn unit<T: Ord + Clone>(d: Dist<T>) -> Hyper<T> {
    Dist::point(d)
}

/// The mixture of a hyper's inners weighted by their outer probabilities.
pub fn avg<T: Ord + Clone>(h: &Hyper<T>) -> Dist<T> {
    let pairs = h
        .iter()
        .flat_map(|(inner, w)| inner.iter().map(move |(x, p)| (x.clone(), p * w)));
    Dist::from_weights_unchecked(pairs).expect("mixture of distributions")
}

/// Merges equal inners and drops zero weights.
pub fn hyper_reduce<T: Ord + Clone>(raw: Vec<(Dist<T>, Rational)>) -> Result<Hyper<T>> {
    Dist::reduce(raw)
}

/// Kleisli composition: apply `f` to every inner and flatten the result.
pub fn kleisli<T: Ord + Clone, E>(
    h: &Hyper<T>,
    mut f: impl FnMut(&Dist<T>) -> std::result::Result<Hyper<T>, E>,
) -> std::result::Result<Hyper<T>, E> {
    let mut raw: Vec<(Dist<T>, Rational)> = Vec::new();
    for (inner, w) in h.iter() {
        for (d, v) in f(inner)? {
            raw.push((d, w * &v));
        }
    }
    Ok(Dist::from_weights_unchecked(raw).expect("products of probabilities"))
}
