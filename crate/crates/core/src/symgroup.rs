//! Symmetric-group combinatorics and Schur-Weyl representation dimensions.
//!
//! Everything here is exact: permutations, cycle counts, lexicographic
//! ranking, integer partitions, and the two irrep dimension formulas
//! (hook lengths for the symmetric group, the shifted-content product for
//! the unitary group). No floating point enters this module.

use num::bigint::BigUint;
use num::{One, Zero};

use crate::{Error, Result};

/// Hard cap on the degree for full-group enumeration: 8! = 40320 indices.
pub const MAX_ENUM_DEGREE: usize = 8;

/// A permutation of `{0, .., k-1}` in one-line notation with its cycle
/// count cached.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Perm {
    image: Vec<usize>,
    cycles: usize,
}

impl Perm {
    /// Builds from one-line notation, validating bijectivity.
    pub fn from_image(image: Vec<usize>) -> Result<Perm> {
        let k = image.len();
        if k == 0 {
            return Err(Error::Domain("permutation degree must be >= 1".into()));
        }
        let mut seen = vec![false; k];
        for &v in &image {
            if v >= k || seen[v] {
                return Err(Error::Domain(format!("not a bijection on 0..{k}: {image:?}")));
            }
            seen[v] = true;
        }
        let cycles = count_cycles(&image);
        Ok(Perm { image, cycles })
    }

    pub fn identity(k: usize) -> Perm {
        Perm { image: (0..k).collect(), cycles: k }
    }

    pub fn degree(&self) -> usize {
        self.image.len()
    }

    /// Number of disjoint cycles, fixed points included.
    pub fn cycle_count(&self) -> usize {
        self.cycles
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// Where `i` is mapped.
    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn is_identity(&self) -> bool {
        self.cycles == self.degree()
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.degree()];
        for (i, &v) in self.image.iter().enumerate() {
            inv[v] = i;
        }
        // A permutation and its inverse have identical cycle structure.
        Perm { image: inv, cycles: self.cycles }
    }

    /// `self ∘ other`: first apply `other`, then `self`.
    pub fn compose(&self, other: &Perm) -> Perm {
        assert_eq!(self.degree(), other.degree(), "degree mismatch");
        let image: Vec<usize> = (0..self.degree()).map(|i| self.image[other.image[i]]).collect();
        let cycles = count_cycles(&image);
        Perm { image, cycles }
    }

    /// Lexicographic rank of the one-line notation; a bijection onto
    /// `0..k!-1` with `rank(identity) = 0`.
    pub fn rank(&self) -> usize {
        let k = self.degree();
        let mut rank = 0usize;
        let mut fact = factorial_usize(k - 1);
        // Count smaller unused values to the right, digit by digit.
        let mut used = vec![false; k];
        for i in 0..k {
            let v = self.image[i];
            let smaller = (0..v).filter(|&u| !used[u]).count();
            rank += smaller * fact;
            used[v] = true;
            if i + 1 < k {
                fact /= k - 1 - i;
            }
        }
        rank
    }

    /// Inverse of [`Perm::rank`].
    pub fn from_rank(k: usize, mut rank: usize) -> Result<Perm> {
        check_enum_degree(k)?;
        let kf = factorial_usize(k);
        if rank >= kf {
            return Err(Error::Domain(format!("rank {rank} out of range for S_{k}")));
        }
        let mut avail: Vec<usize> = (0..k).collect();
        let mut image = Vec::with_capacity(k);
        let mut fact = kf / k;
        for i in 0..k {
            let idx = rank / fact;
            rank %= fact;
            image.push(avail.remove(idx));
            if i + 1 < k {
                fact /= k - 1 - i;
            }
        }
        Perm::from_image(image)
    }
}

fn count_cycles(image: &[usize]) -> usize {
    let mut seen = vec![false; image.len()];
    let mut cycles = 0;
    for start in 0..image.len() {
        if seen[start] {
            continue;
        }
        cycles += 1;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = image[i];
        }
    }
    cycles
}

fn check_enum_degree(k: usize) -> Result<()> {
    if k == 0 || k > MAX_ENUM_DEGREE {
        return Err(Error::Capacity(format!(
            "degree {k} outside 1..={MAX_ENUM_DEGREE} (k! index cap)"
        )));
    }
    Ok(())
}

pub fn factorial_usize(n: usize) -> usize {
    (1..=n).product::<usize>().max(1)
}

pub fn factorial_big(n: u64) -> BigUint {
    let mut acc = BigUint::one();
    for j in 2..=n {
        acc *= j;
    }
    acc
}

/// All of S_k in lexicographic one-line order, so that the element at
/// position r has rank r. This order fixes the index convention of every
/// S_k-indexed matrix in the crate.
pub fn enumerate_group(k: usize) -> Result<Vec<Perm>> {
    check_enum_degree(k)?;
    let mut out = Vec::with_capacity(factorial_usize(k));
    let mut image: Vec<usize> = (0..k).collect();
    loop {
        out.push(Perm::from_image(image.clone()).expect("valid by construction"));
        // next_permutation in lexicographic order
        let Some(i) = (0..k.saturating_sub(1)).rev().find(|&i| image[i] < image[i + 1]) else {
            break;
        };
        let j = (i + 1..k).rev().find(|&j| image[j] > image[i]).unwrap();
        image.swap(i, j);
        image[i + 1..].reverse();
    }
    Ok(out)
}

/// Precomputed table of `c(σ⁻¹ τ)` for all pairs of ranks in S_k; the
/// single combinatorial kernel behind every Gram/protocol matrix.
pub struct CycleTable {
    pub k: usize,
    pub perms: Vec<Perm>,
    /// Row-major `kf × kf`: entry `[σ·kf + τ] = c(σ⁻¹τ)`.
    table: Vec<u8>,
}

impl CycleTable {
    pub fn new(k: usize) -> Result<CycleTable> {
        let perms = enumerate_group(k)?;
        let kf = perms.len();
        let mut table = vec![0u8; kf * kf];
        for (si, s) in perms.iter().enumerate() {
            let sinv = s.inverse();
            for (ti, t) in perms.iter().enumerate() {
                table[si * kf + ti] = sinv.compose(t).cycle_count() as u8;
            }
        }
        Ok(CycleTable { k, perms, table })
    }

    pub fn group_order(&self) -> usize {
        self.perms.len()
    }

    /// `c(σ⁻¹τ)` by ranks.
    pub fn rel_cycles(&self, sigma: usize, tau: usize) -> usize {
        self.table[sigma * self.perms.len() + tau] as usize
    }
}

/// A partition λ of k: weakly decreasing positive parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    parts: Vec<u64>,
    k: u64,
}

impl Partition {
    /// Builds from parts, dropping trailing zeros and validating order.
    pub fn new(parts: Vec<u64>) -> Result<Partition> {
        let mut parts = parts;
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Domain(format!("parts not weakly decreasing: {parts:?}")));
        }
        let k = parts.iter().sum();
        if k == 0 {
            return Err(Error::Domain("empty partition".into()));
        }
        Ok(Partition { parts, k })
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn num_parts(&self) -> usize {
        self.parts.len()
    }

    /// Hook length of cell (i, j), 0-based.
    pub fn hook(&self, i: usize, j: usize) -> u64 {
        let arm = self.parts[i] - 1 - j as u64;
        let leg = self.parts[i + 1..].iter().take_while(|&&p| p > j as u64).count() as u64;
        arm + leg + 1
    }

    /// Shifted contents `d + j - i` over all cells, as signed offsets
    /// `j - i` (0-based cells, so the offset of cell (i,j) is j - i).
    pub fn content_offsets(&self) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.k as usize);
        for (i, &p) in self.parts.iter().enumerate() {
            for j in 0..p {
                out.push(j as i64 - i as i64);
            }
        }
        out
    }
}

/// All partitions of k with at most d nonzero parts, lexicographically
/// decreasing: (k) first.
pub fn partitions(k: u64, d: u64) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut cur: Vec<u64> = Vec::new();
    fn rec(remaining: u64, max_part: u64, slots: u64, cur: &mut Vec<u64>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition::new(cur.clone()).expect("valid by construction"));
            return;
        }
        if slots == 0 {
            return;
        }
        let hi = remaining.min(max_part);
        // Largest first gives lexicographically decreasing output order.
        for p in (1..=hi).rev() {
            cur.push(p);
            rec(remaining - p, p, slots - 1, cur, out);
            cur.pop();
        }
    }
    if k >= 1 && d >= 1 {
        rec(k, k, d, &mut cur, &mut out);
    }
    out
}

/// Symmetric-group irrep dimension d_λ = k! / ∏ hook lengths, exact.
///
/// The hook-length product always divides k!; a nonzero remainder means the
/// implementation is broken, and the function aborts rather than rounding.
pub fn sym_irrep_dim(lambda: &Partition) -> BigUint {
    let mut hooks = BigUint::one();
    for (i, &p) in lambda.parts().iter().enumerate() {
        for j in 0..p as usize {
            hooks *= lambda.hook(i, j);
        }
    }
    let kf = factorial_big(lambda.k());
    let (q, r) = num::Integer::div_rem(&kf, &hooks);
    assert!(r.is_zero(), "hook-length formula produced non-integer for {lambda:?}");
    q
}

/// Unitary-group irrep dimension m_λ^d, exact.
///
/// Evaluated as d_λ/k! · ∏_{(i,j)∈λ} (d + j - i), which equals the Weyl
/// dimension formula but costs k cells instead of d² factor pairs.
pub fn unitary_irrep_dim(lambda: &Partition, d: u64) -> Result<BigUint> {
    if lambda.num_parts() as u64 > d {
        return Err(Error::Domain(format!(
            "partition has {} parts, more than d = {d}",
            lambda.num_parts()
        )));
    }
    let mut num = sym_irrep_dim(lambda);
    for off in lambda.content_offsets() {
        let factor = d as i64 + off;
        assert!(factor > 0, "shifted content nonpositive despite parts <= d");
        num *= factor as u64;
    }
    let kf = factorial_big(lambda.k());
    let (q, r) = num::Integer::div_rem(&num, &kf);
    assert!(r.is_zero(), "Weyl dimension produced non-integer for {lambda:?}, d={d}");
    Ok(q)
}

/// Weyl dimension formula ∏_{1≤i<j≤d} (λ_i - λ_j + j - i)/(j - i), exact.
/// Quadratic in d; kept as an independent route for cross-checks.
pub fn unitary_irrep_dim_weyl(lambda: &Partition, d: u64) -> Result<BigUint> {
    if lambda.num_parts() as u64 > d {
        return Err(Error::Domain(format!(
            "partition has {} parts, more than d = {d}",
            lambda.num_parts()
        )));
    }
    let lam = |i: usize| -> u64 {
        if i < lambda.num_parts() {
            lambda.parts()[i]
        } else {
            0
        }
    };
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..d as usize {
        for j in i + 1..d as usize {
            num *= lam(i) - lam(j) + (j - i) as u64;
            den *= (j - i) as u64;
        }
    }
    let (q, r) = num::Integer::div_rem(&num, &den);
    assert!(r.is_zero(), "Weyl product non-integer for {lambda:?}, d={d}");
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::ToPrimitive;

    #[test]
    fn enumerate_s1_and_s3() {
        let g1 = enumerate_group(1).unwrap();
        assert_eq!(g1.len(), 1);
        assert!(g1[0].is_identity());

        let g3 = enumerate_group(3).unwrap();
        assert_eq!(g3.len(), 6);
        assert!(g3[0].is_identity());
        assert_eq!(g3[5].image(), &[2, 1, 0]);
        // rank is the position in enumeration order
        for (r, p) in g3.iter().enumerate() {
            assert_eq!(p.rank(), r);
            assert_eq!(&Perm::from_rank(3, r).unwrap(), p);
        }
    }

    #[test]
    fn enumerate_s4_count() {
        assert_eq!(enumerate_group(4).unwrap().len(), 24);
    }

    #[test]
    fn enumerate_rejects_out_of_range() {
        assert!(matches!(enumerate_group(0), Err(Error::Capacity(_))));
        assert!(matches!(enumerate_group(9), Err(Error::Capacity(_))));
    }

    #[test]
    fn cycle_counts() {
        assert_eq!(Perm::identity(5).cycle_count(), 5);
        // transposition (0 1) in S_4: one 2-cycle plus two fixed points
        let t = Perm::from_image(vec![1, 0, 2, 3]).unwrap();
        assert_eq!(t.cycle_count(), 3);
        // 3-cycle in S_3
        let c = Perm::from_image(vec![1, 2, 0]).unwrap();
        assert_eq!(c.cycle_count(), 1);
        // c(π) = k iff identity
        for p in enumerate_group(4).unwrap() {
            assert_eq!(p.cycle_count() == 4, p.is_identity());
        }
    }

    #[test]
    fn group_axioms_small_degrees() {
        for k in 1..=5 {
            let g = enumerate_group(k).unwrap();
            for p in &g {
                assert!(p.compose(&p.inverse()).is_identity());
                assert!(p.inverse().compose(p).is_identity());
            }
            // cycle count is a class function: c(πσπ⁻¹) = c(σ)
            for p in g.iter().take(6) {
                for s in g.iter().take(6) {
                    let conj = p.compose(s).compose(&p.inverse());
                    assert_eq!(conj.cycle_count(), s.cycle_count());
                }
            }
        }
    }

    #[test]
    fn partitions_examples() {
        let p = partitions(3, 2);
        assert_eq!(
            p.iter().map(|q| q.parts().to_vec()).collect::<Vec<_>>(),
            vec![vec![3], vec![2, 1]]
        );
        assert_eq!(partitions(2, 1).len(), 1);
        assert_eq!(partitions(4, 4).len(), 5);
    }

    /// Brute-force count of standard Young tableaux by DFS, an oracle for
    /// the hook-length formula.
    fn count_syt(lambda: &Partition) -> u64 {
        fn rec(shape: &[u64], filled: &mut Vec<u64>, next: u64, k: u64) -> u64 {
            if next > k {
                return 1;
            }
            let mut total = 0;
            for r in 0..shape.len() {
                let can = filled[r] < shape[r] && (r == 0 || filled[r] < filled[r - 1]);
                if can {
                    filled[r] += 1;
                    total += rec(shape, filled, next + 1, k);
                    filled[r] -= 1;
                }
            }
            total
        }
        let mut filled = vec![0u64; lambda.num_parts()];
        rec(lambda.parts(), &mut filled, 1, lambda.k())
    }

    #[test]
    fn sym_dim_examples_and_syt_oracle() {
        let row = Partition::new(vec![4]).unwrap();
        assert_eq!(sym_irrep_dim(&row).to_u64().unwrap(), 1);
        let col = Partition::new(vec![1, 1, 1]).unwrap();
        assert_eq!(sym_irrep_dim(&col).to_u64().unwrap(), 1);
        let hook21 = Partition::new(vec![2, 1]).unwrap();
        assert_eq!(sym_irrep_dim(&hook21).to_u64().unwrap(), 2);
        // full SYT cross-check for k <= 6
        for k in 1..=6u64 {
            for lam in partitions(k, k) {
                assert_eq!(sym_irrep_dim(&lam).to_u64().unwrap(), count_syt(&lam), "{lam:?}");
            }
        }
    }

    #[test]
    fn unitary_dim_examples() {
        let one = Partition::new(vec![1]).unwrap();
        for d in 1..=7 {
            assert_eq!(unitary_irrep_dim(&one, d).unwrap().to_u64().unwrap(), d);
        }
        let sym2 = Partition::new(vec![2]).unwrap();
        assert_eq!(unitary_irrep_dim(&sym2, 2).unwrap().to_u64().unwrap(), 3);
        let anti = Partition::new(vec![1, 1]).unwrap();
        assert_eq!(unitary_irrep_dim(&anti, 2).unwrap().to_u64().unwrap(), 1);
        assert!(unitary_irrep_dim(&Partition::new(vec![1, 1, 1]).unwrap(), 2).is_err());
    }

    #[test]
    fn unitary_dim_two_routes_agree() {
        for k in 1..=6u64 {
            for d in 1..=6u64 {
                for lam in partitions(k, d) {
                    assert_eq!(
                        unitary_irrep_dim(&lam, d).unwrap(),
                        unitary_irrep_dim_weyl(&lam, d).unwrap(),
                        "{lam:?} d={d}"
                    );
                }
            }
        }
    }

    #[test]
    fn schur_weyl_dimension_counts() {
        // Σ d_λ² = k!
        for k in 1..=8u64 {
            let total: BigUint =
                partitions(k, k).iter().map(|l| sym_irrep_dim(l).pow(2)).sum();
            assert_eq!(total, factorial_big(k));
        }
        // Σ_{λ ⊢_d k} d_λ m_λ^d = d^k
        for k in 1..=6u64 {
            for d in 1..=6u64 {
                let total: BigUint = partitions(k, d)
                    .iter()
                    .map(|l| sym_irrep_dim(l) * unitary_irrep_dim(l, d).unwrap())
                    .sum();
                assert_eq!(total, BigUint::from(d).pow(k as u32), "k={k} d={d}");
            }
        }
    }

    #[test]
    fn min_multiplicity_floor() {
        // m_λ^d ≥ d^k · d_λ / k! · (1 - k²/d) for d ≥ k².
        for k in 1..=6u64 {
            for d in [k * k, k * k + 1, 2 * k * k, 64.max(k * k)] {
                for lam in partitions(k, d.min(k)) {
                    let m = unitary_irrep_dim(&lam, d).unwrap().to_f64().unwrap();
                    let dl = sym_irrep_dim(&lam).to_f64().unwrap();
                    let kf = factorial_big(k).to_f64().unwrap();
                    let floor = (d as f64).powi(k as i32) * dl / kf * (1.0 - (k * k) as f64 / d as f64);
                    assert!(m >= floor - 1e-9 * floor.abs(), "{lam:?} d={d}: {m} < {floor}");
                }
            }
        }
    }

    #[test]
    fn cycle_table_matches_direct() {
        let ct = CycleTable::new(4).unwrap();
        for (si, s) in ct.perms.iter().enumerate() {
            for (ti, t) in ct.perms.iter().enumerate() {
                assert_eq!(ct.rel_cycles(si, ti), s.inverse().compose(t).cycle_count());
            }
        }
    }
}
