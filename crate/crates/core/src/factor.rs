//! Sparse factors over finite-support variables and sum-product variable
//! elimination.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::hash::{Hash, Hasher};

/// A finite-support value usable as a table key.
///
/// Equality is exact; `-0.0` is normalized to `0.0` so numerically equal
/// atoms collide.
#[derive(Debug, Clone, Copy)]
pub struct Atom(f64);

impl Atom {
    pub fn new(v: f64) -> Self {
        debug_assert!(!v.is_nan(), "NaN is not a valid atom");
        Atom(if v == 0.0 { 0.0 } else { v })
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl PartialEq for Atom {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits()
    }
}

impl Eq for Atom {}

impl Hash for Atom {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

pub type Key = Vec<Atom>;

pub fn key(values: &[f64]) -> Key {
    values.iter().map(|v| Atom::new(*v)).collect()
}

/// Nonnegative table over assignments to `scope`. Absent keys have value 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    scope: Vec<String>,
    table: BTreeMap<Key, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EliminationOrder {
    /// Eliminate the variable with the fewest neighbours first.
    #[default]
    MinDegree,
    /// Eliminate in the order the hidden variables were given.
    Declaration,
}

impl Factor {
    /// # Panics
    /// If scope names repeat, a key has the wrong arity or an entry is
    /// negative.
    pub fn new(scope: Vec<String>, table: BTreeMap<Key, f64>) -> Self {
        for (i, s) in scope.iter().enumerate() {
            assert!(!scope[..i].contains(s), "duplicate scope variable `{s}`");
        }
        for (k, v) in &table {
            assert_eq!(k.len(), scope.len(), "key arity");
            assert!(*v >= 0.0, "negative factor entry");
        }
        Factor { scope, table }
    }

    /// Factor with empty scope holding `value`.
    pub fn scalar(value: f64) -> Self {
        Factor {
            scope: Vec::new(),
            table: BTreeMap::from([(Vec::new(), value)]),
        }
    }

    /// `I(var = value)`.
    pub fn indicator(var: &str, value: f64) -> Self {
        Factor {
            scope: vec![var.to_string()],
            table: BTreeMap::from([(vec![Atom::new(value)], 1.0)]),
        }
    }

    pub fn scope(&self) -> &[String] {
        &self.scope
    }

    pub fn table(&self) -> &BTreeMap<Key, f64> {
        &self.table
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn get(&self, values: &[f64]) -> f64 {
        self.table.get(&key(values)).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.table.values().sum()
    }

    fn position(&self, var: &str) -> Option<usize> {
        self.scope.iter().position(|s| s == var)
    }

    pub fn contains(&self, var: &str) -> bool {
        self.position(var).is_some()
    }

    /// Pointwise product, joined on shared variables. The result scope is
    /// `self`'s scope followed by `other`'s remaining variables.
    pub fn product(&self, other: &Factor) -> Factor {
        let shared: Vec<(usize, usize)> = self
            .scope
            .iter()
            .enumerate()
            .filter_map(|(i, s)| other.position(s).map(|j| (i, j)))
            .collect();
        let extra: Vec<usize> = (0..other.scope.len())
            .filter(|j| !shared.iter().any(|(_, b)| b == j))
            .collect();

        let mut index: HashMap<Key, Vec<(&Key, f64)>> = HashMap::new();
        for (k, v) in &other.table {
            let proj: Key = shared.iter().map(|&(_, j)| k[j]).collect();
            index.entry(proj).or_default().push((k, *v));
        }

        let mut scope = self.scope.clone();
        scope.extend(extra.iter().map(|&j| other.scope[j].clone()));
        let mut table = BTreeMap::new();
        for (k, v) in &self.table {
            let proj: Key = shared.iter().map(|&(i, _)| k[i]).collect();
            let Some(matches) = index.get(&proj) else { continue };
            for (ok, ov) in matches {
                let mut nk = k.clone();
                nk.extend(extra.iter().map(|&j| ok[j]));
                *table.entry(nk).or_insert(0.0) += v * ov;
            }
        }
        Factor { scope, table }
    }

    /// Sum `var` out. No-op when `var` is not in scope.
    pub fn sum_out(&self, var: &str) -> Factor {
        let Some(p) = self.position(var) else {
            return self.clone();
        };
        let mut scope = self.scope.clone();
        scope.remove(p);
        let mut table = BTreeMap::new();
        for (k, v) in &self.table {
            let mut nk = k.clone();
            nk.remove(p);
            *table.entry(nk).or_insert(0.0) += v;
        }
        Factor { scope, table }
    }

    /// Keep rows with `var == value` and drop `var` from the scope.
    pub fn reduce(&self, var: &str, value: f64) -> Factor {
        let Some(p) = self.position(var) else {
            return self.clone();
        };
        let a = Atom::new(value);
        let mut scope = self.scope.clone();
        scope.remove(p);
        let table = self
            .table
            .iter()
            .filter(|(k, _)| k[p] == a)
            .map(|(k, v)| {
                let mut nk = k.clone();
                nk.remove(p);
                (nk, *v)
            })
            .collect();
        Factor { scope, table }
    }

    /// Permute columns to `scope`, which must be a permutation of the
    /// current scope.
    pub fn reorder(&self, scope: &[String]) -> Option<Factor> {
        if scope.len() != self.scope.len() {
            return None;
        }
        let perm: Vec<usize> = scope.iter().map(|s| self.position(s)).collect::<Option<_>>()?;
        let table = self
            .table
            .iter()
            .map(|(k, v)| (perm.iter().map(|&p| k[p]).collect(), *v))
            .collect();
        Some(Factor {
            scope: scope.to_vec(),
            table,
        })
    }

    /// Scale to total mass 1; `None` when the mass is zero.
    pub fn normalized(&self) -> Option<Factor> {
        let z = self.total();
        if z <= 0.0 {
            return None;
        }
        let table = self.table.iter().map(|(k, v)| (k.clone(), v / z)).collect();
        Some(Factor {
            scope: self.scope.clone(),
            table,
        })
    }

    /// Drop zero entries.
    pub fn pruned(mut self) -> Factor {
        self.table.retain(|_, v| *v > 0.0);
        self
    }

    /// Largest absolute entry difference after aligning scopes; `None` when
    /// the scopes are not permutations of each other.
    pub fn max_abs_diff(&self, other: &Factor) -> Option<f64> {
        let other = other.reorder(&self.scope)?;
        let mut diff: f64 = 0.0;
        for (k, v) in &self.table {
            diff = diff.max((v - other.table.get(k).copied().unwrap_or(0.0)).abs());
        }
        for (k, v) in &other.table {
            if !self.table.contains_key(k) {
                diff = diff.max(v.abs());
            }
        }
        Some(diff)
    }
}

/// Multiply all factors together.
pub fn product_all(factors: &[Factor]) -> Factor {
    factors.iter().fold(Factor::scalar(1.0), |acc, f| acc.product(f))
}

/// Sum-product elimination of `hidden` from the product of `factors`.
///
/// Ties under the min-degree heuristic go to the earlier entry of `hidden`.
/// Variables in `hidden` that appear in no factor are ignored.
pub fn eliminate(factors: Vec<Factor>, hidden: &[String], order: EliminationOrder) -> Factor {
    let mut pool = factors;
    let mut remaining: Vec<&String> = hidden.iter().filter(|h| pool.iter().any(|f| f.contains(h))).collect();
    while !remaining.is_empty() {
        let pick = match order {
            EliminationOrder::Declaration => 0,
            EliminationOrder::MinDegree => {
                let degree = |var: &str| {
                    let mut nbrs: Vec<&str> = Vec::new();
                    for f in pool.iter().filter(|f| f.contains(var)) {
                        for s in f.scope() {
                            if s != var && !nbrs.contains(&s.as_str()) {
                                nbrs.push(s);
                            }
                        }
                    }
                    nbrs.len()
                };
                let mut best = 0;
                let mut best_deg = usize::MAX;
                for (k, v) in remaining.iter().enumerate() {
                    let d = degree(v);
                    if d < best_deg {
                        best = k;
                        best_deg = d;
                    }
                }
                best
            }
        };
        let var = remaining.remove(pick);
        let (touching, rest): (Vec<Factor>, Vec<Factor>) = pool.into_iter().partition(|f| f.contains(var));
        pool = rest;
        pool.push(product_all(&touching).sum_out(var));
    }
    product_all(&pool)
}
