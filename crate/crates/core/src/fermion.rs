//! Fermionic ladder-operator strings and their normal ordering under the
//! canonical anticommutation relations `{a_p, a†_q} = δ_pq`.

use std::collections::BTreeMap;
use std::fmt;

/// A single creation (`dagger = true`) or annihilation operator on a spin orbital.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LadderOp {
    pub orbital: usize,
    pub dagger: bool,
}

impl LadderOp {
    pub fn create(orbital: usize) -> Self {
        Self { orbital, dagger: true }
    }

    pub fn annihilate(orbital: usize) -> Self {
        Self { orbital, dagger: false }
    }

    pub fn adjoint(self) -> Self {
        Self { orbital: self.orbital, dagger: !self.dagger }
    }
}

impl fmt::Display for LadderOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dagger {
            write!(f, "a+{}", self.orbital)
        } else {
            write!(f, "a{}", self.orbital)
        }
    }
}

/// Adjoint of an operator product: reversed order, daggers flipped.
pub fn adjoint_string(ops: &[LadderOp]) -> Vec<LadderOp> {
    ops.iter().rev().map(|op| op.adjoint()).collect()
}

/// A normal-ordered monomial `a†_{c0} a†_{c1} ... a_{a0} a_{a1} ...` with
/// creators strictly ascending and annihilators strictly descending.
///
/// With this ordering a two-body monomial `a†_p a†_q a_s a_r` (p<q, r<s)
/// is exactly the packed 2-RDM element `D[(p,q),(r,s)]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NormalTerm {
    pub creators: Vec<usize>,
    pub annihilators: Vec<usize>,
}

impl NormalTerm {
    pub fn rank(&self) -> usize {
        self.creators.len() + self.annihilators.len()
    }

    pub fn is_constant(&self) -> bool {
        self.creators.is_empty() && self.annihilators.is_empty()
    }
}

/// Insertion-sorts `v` and returns the permutation parity, or `None` if two
/// entries coincide.
fn sort_with_parity(v: &mut [usize], ascending: bool) -> Option<bool> {
    let mut odd = false;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 {
            let (a, b) = (v[j - 1], v[j]);
            if a == b {
                return None;
            }
            let out_of_order = if ascending { a > b } else { a < b };
            if !out_of_order {
                break;
            }
            v.swap(j - 1, j);
            odd = !odd;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some(odd)
}

/// Expands `coef * ops` into a sum of normal-ordered monomials.
pub fn normal_order(ops: &[LadderOp], coef: f64) -> BTreeMap<NormalTerm, f64> {
    let mut out = BTreeMap::new();
    normal_order_into(ops, coef, &mut out);
    out.retain(|_, c| *c != 0.0);
    out
}

/// Accumulates the normal-ordered expansion of `coef * ops` into `out`.
/// Exactly cancelled entries are left in place with a zero coefficient.
pub fn normal_order_into(ops: &[LadderOp], coef: f64, out: &mut BTreeMap<NormalTerm, f64>) {
    let mut stack: Vec<(f64, Vec<LadderOp>)> = vec![(coef, ops.to_vec())];
    while let Some((c, s)) = stack.pop() {
        if c == 0.0 {
            continue;
        }
        let swap_at = s.windows(2).position(|w| !w[0].dagger && w[1].dagger);
        match swap_at {
            Some(k) => {
                let (p, q) = (s[k].orbital, s[k + 1].orbital);
                if p == q {
                    let mut contracted = Vec::with_capacity(s.len() - 2);
                    contracted.extend_from_slice(&s[..k]);
                    contracted.extend_from_slice(&s[k + 2..]);
                    stack.push((c, contracted));
                }
                let mut swapped = s;
                swapped.swap(k, k + 1);
                stack.push((-c, swapped));
            }
            None => {
                let split = s.iter().position(|op| !op.dagger).unwrap_or(s.len());
                let mut creators: Vec<usize> = s[..split].iter().map(|op| op.orbital).collect();
                let mut annihilators: Vec<usize> = s[split..].iter().map(|op| op.orbital).collect();
                let Some(odd_c) = sort_with_parity(&mut creators, true) else { continue };
                let Some(odd_a) = sort_with_parity(&mut annihilators, false) else { continue };
                let sign = if odd_c ^ odd_a { -1.0 } else { 1.0 };
                *out.entry(NormalTerm { creators, annihilators }).or_insert(0.0) += sign * c;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(p: usize) -> LadderOp {
        LadderOp::create(p)
    }
    fn a(p: usize) -> LadderOp {
        LadderOp::annihilate(p)
    }

    #[test]
    fn anticommutator_gives_delta() {
        // a_p a†_p + a†_p a_p = 1
        let mut out = BTreeMap::new();
        normal_order_into(&[a(3), c(3)], 1.0, &mut out);
        normal_order_into(&[c(3), a(3)], 1.0, &mut out);
        out.retain(|_, v| *v != 0.0);
        assert_eq!(out.len(), 1);
        assert_eq!(out[&NormalTerm { creators: vec![], annihilators: vec![] }], 1.0);
    }

    #[test]
    fn distinct_orbitals_anticommute() {
        let t = normal_order(&[a(1), c(2)], 1.0);
        assert_eq!(t.len(), 1);
        assert_eq!(t[&NormalTerm { creators: vec![2], annihilators: vec![1] }], -1.0);
    }

    #[test]
    fn pauli_exclusion() {
        assert!(normal_order(&[c(0), c(0)], 1.0).is_empty());
        assert!(normal_order(&[a(4), a(4)], 1.0).is_empty());
    }

    #[test]
    fn number_product_is_pair_element() {
        // n_0 n_1 = a†_0 a†_1 a_1 a_0
        let t = normal_order(&[c(0), a(0), c(1), a(1)], 1.0);
        assert_eq!(t.len(), 1);
        assert_eq!(t[&NormalTerm { creators: vec![0, 1], annihilators: vec![1, 0] }], 1.0);
    }

    #[test]
    fn number_squared_is_number() {
        let t = normal_order(&[c(2), a(2), c(2), a(2)], 1.0);
        assert_eq!(t.len(), 1);
        assert_eq!(t[&NormalTerm { creators: vec![2], annihilators: vec![2] }], 1.0);
    }

    #[test]
    fn t2_anticommutator_has_no_three_body_part() {
        // {C, C'†} with C = a†_0 a†_1 a_2, C' = a†_0 a†_3 a_1
        let cc = [c(0), c(1), a(2)];
        let cp = [c(0), c(3), a(1)];
        let cp_dag = adjoint_string(&cp);
        let mut out = BTreeMap::new();
        let s1: Vec<_> = cc.iter().chain(cp_dag.iter()).copied().collect();
        let s2: Vec<_> = cp_dag.iter().chain(cc.iter()).copied().collect();
        normal_order_into(&s1, 1.0, &mut out);
        normal_order_into(&s2, 1.0, &mut out);
        assert!(out.iter().all(|(k, v)| k.rank() < 6 || *v == 0.0));
    }
}
