use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::lattice::RealizedLattice;
use crate::codes::STCodeLattice;
use crate::error::{Error, Result};
use crate::matrix::{complex_gaussian, ComplexMatrix, ExactMatrix};

/// Largest number of symbol units the ordering search will enumerate subsets of.
pub const MAX_SEARCH_UNITS: usize = 20;

/// Trials and tolerance needed before the empirical mask may set the flag.
pub const MIN_CERTIFYING_TRIALS: usize = 100;
pub const CERTIFYING_TOL: f64 = 1e-9;

/// Pairs `i < j` with `B_iB_j† + B_jB_i† = 0`, tested exactly.
pub fn hr_pairs(basis: &[ExactMatrix]) -> Result<Vec<(usize, usize)>> {
    let adj: Vec<ExactMatrix> = basis.iter().map(|b| b.conj_transpose()).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            let s = basis[i].try_mul(&adj[j])?.try_add(&basis[j].try_mul(&adj[i])?)?;
            if s.is_zero() {
                out.push((i, j));
            }
        }
    }
    Ok(out)
}

/// Numeric counterpart of [`hr_pairs`] for embedded bases.
pub fn hr_pairs_numeric(basis: &[ComplexMatrix], tol: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            let s = &basis[i] * basis[j].adjoint() + &basis[j] * basis[i].adjoint();
            if s.iter().all(|z| z.norm() <= tol) {
                out.push((i, j));
            }
        }
    }
    out
}

/// A split of the coefficients into jointly enumerated `conditioning` ones and
/// `groups` that decode independently once the conditioning set is fixed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cut {
    pub exponent: usize,
    pub groups: Vec<Vec<usize>>,
    pub conditioning: Vec<usize>,
}

impl Cut {
    /// Decoding order: groups first, conditioning set last (decoded first by
    /// the back-substituting sphere decoder).
    pub fn order(&self) -> Vec<usize> {
        self.groups.iter().flatten().chain(&self.conditioning).copied().collect()
    }
}

fn unit_of(k: usize, units: &[Vec<usize>]) -> Vec<usize> {
    let mut owner = vec![0; k];
    for (u, members) in units.iter().enumerate() {
        for &j in members {
            owner[j] = u;
        }
    }
    owner
}

/// Connected components of `vars` where `coupled(a, b)` or a shared unit joins two variables.
fn components(vars: &[usize], owner: &[usize], coupled: &dyn Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut label: Vec<usize> = (0..vars.len()).collect();
    fn find(l: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while l[r] != r {
            r = l[r];
        }
        let mut c = x;
        while l[c] != r {
            let n = l[c];
            l[c] = r;
            c = n;
        }
        r
    }
    for a in 0..vars.len() {
        for b in a + 1..vars.len() {
            if owner[vars[a]] == owner[vars[b]] || coupled(vars[a], vars[b]) {
                let (ra, rb) = (find(&mut label, a), find(&mut label, b));
                if ra != rb {
                    label[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_to_group = vec![usize::MAX; vars.len()];
    for a in 0..vars.len() {
        let r = find(&mut label, a);
        if root_to_group[r] == usize::MAX {
            root_to_group[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_to_group[r]].push(vars[a]);
    }
    groups
}

fn cut_for(k: usize, decoupled: &[usize], owner: &[usize], coupled: &dyn Fn(usize, usize) -> bool) -> Cut {
    let groups = if decoupled.is_empty() {
        Vec::new()
    } else {
        components(decoupled, owner, coupled)
    };
    let largest = groups.iter().map(Vec::len).max().unwrap_or(0);
    let mut in_s = vec![false; k];
    for &v in decoupled {
        in_s[v] = true;
    }
    let conditioning: Vec<usize> = (0..k).filter(|&v| !in_s[v]).collect();
    Cut {
        exponent: conditioning.len() + largest,
        groups,
        conditioning,
    }
}

/// Best cut when the decoder may reorder the basis freely: every subset of
/// units is tried as the decoupled part, and HR-orthogonal pairs are the only
/// ones allowed in different groups.
pub fn hr_cut(k: usize, pairs: &[(usize, usize)], units: &[Vec<usize>]) -> Result<Cut> {
    if units.len() > MAX_SEARCH_UNITS {
        return Err(Error::Budget {
            needed: 1u128 << units.len(),
            budget: 1u128 << MAX_SEARCH_UNITS,
        });
    }
    let mut orth = vec![vec![false; k]; k];
    for &(i, j) in pairs {
        orth[i][j] = true;
        orth[j][i] = true;
    }
    let owner = unit_of(k, units);
    let coupled = |a: usize, b: usize| !orth[a][b];
    let mut best = cut_for(k, &[], &owner, &coupled);
    for mask in 1u32..(1u32 << units.len()) {
        let vars: Vec<usize> = (0..units.len())
            .filter(|u| mask >> u & 1 == 1)
            .flat_map(|u| units[u].iter().copied())
            .collect();
        let cut = cut_for(k, &vars, &owner, &coupled);
        if cut.exponent < best.exponent {
            best = cut;
        }
    }
    // conditioning coefficients stay grouped by unit, in unit order
    let mut in_cond = vec![false; k];
    for &v in &best.conditioning {
        in_cond[v] = true;
    }
    best.conditioning = units.iter().flatten().copied().filter(|&v| in_cond[v]).collect();
    Ok(best)
}

/// Best cut read off an R zero mask given in decoding order `order`: the top
/// `m` coefficients decouple into components of the non-zero pattern, and `m`
/// may only fall on a unit boundary.
pub fn mask_cut(mask: &[Vec<bool>], order: &[usize], units: &[Vec<usize>]) -> Cut {
    let k = order.len();
    let owner = unit_of(k, units);
    // position p in the order is coupled to q > p when R[p][q] is not certified zero
    let mut pos = vec![0; k];
    for (p, &v) in order.iter().enumerate() {
        pos[v] = p;
    }
    let coupled = |a: usize, b: usize| {
        let (p, q) = (pos[a].min(pos[b]), pos[a].max(pos[b]));
        !mask[p][q]
    };
    let mut best = cut_for(k, &[], &owner, &coupled);
    let mut seen_units = std::collections::BTreeMap::new();
    for m in 1..=k {
        let u = owner[order[m - 1]];
        *seen_units.entry(u).or_insert(0usize) += 1;
        let boundary = seen_units.iter().all(|(&u, &c)| c == units[u].len());
        if !boundary {
            continue;
        }
        let cut = cut_for(k, &order[..m], &owner, &coupled);
        if cut.exponent < best.exponent {
            best = cut;
        }
    }
    best
}

/// Number of receive antennas giving a square or tall real generator.
pub fn analysis_receive_antennas(code: &STCodeLattice) -> usize {
    let n = code.n();
    code.k().div_ceil(2 * n).max(1)
}

/// Certified zeros of R: `|R_ab| < tol·‖R‖_F` for `a < b` in every trial.
/// Columns are taken in `order`; the mask is indexed by position.
pub fn zero_mask(basis: &[ComplexMatrix], order: &[usize], n_d: usize, trials: usize, tol: f64, seed: u64) -> Result<Vec<Vec<bool>>> {
    let k = order.len();
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let n = basis.first().map_or(0, |b| b.nrows());
    let ordered: Vec<ComplexMatrix> = order.iter().map(|&j| basis[j].clone()).collect();
    let mut mask = vec![vec![false; k]; k];
    for (a, row) in mask.iter_mut().enumerate() {
        for cell in row.iter_mut().skip(a + 1) {
            *cell = true;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0;
    let mut attempts = 0;
    while done < trials {
        attempts += 1;
        if attempts > 10 * trials + 10 {
            return Err(Error::DegenerateLattice("no channel gives a full-rank generator".into()));
        }
        let h = complex_gaussian(n_d, n, &mut rng);
        let lat = match RealizedLattice::from_channel(&h, &ordered) {
            Ok(l) => l,
            Err(Error::DegenerateChannel(_)) => continue,
            Err(e) => return Err(e),
        };
        let thr = tol * lat.r.norm();
        for (a, row) in mask.iter_mut().enumerate() {
            for (b, cell) in row.iter_mut().enumerate().skip(a + 1) {
                if lat.r[(a, b)].abs() >= thr {
                    *cell = false;
                }
            }
        }
        done += 1;
    }
    Ok(mask)
}

#[derive(Debug, Clone, Serialize)]
pub struct FdReport {
    pub code: String,
    pub k: usize,
    pub trials: usize,
    pub tol: f64,
    pub seed: u64,
    pub receive_antennas: usize,
    pub units: Vec<Vec<usize>>,
    /// Column order used for the empirical mask.
    pub order: Vec<usize>,
    /// Upper-triangular certified zeros, indexed by position in `order`.
    pub zero_mask: Vec<Vec<bool>>,
    pub hr_pairs: Vec<(usize, usize)>,
    pub hr_exponent: usize,
    pub complexity_exponent: usize,
    pub groups: Vec<Vec<usize>>,
    pub conditioning: Vec<usize>,
    pub fast_decodable: bool,
}

/// HR-orthogonality search, empirical R mask in the resulting order, and the
/// exponent k′ of `|J|^{k′}` read from both.
pub fn fd_analyze(code: &STCodeLattice, trials: usize, tol: f64, seed: u64) -> Result<FdReport> {
    let k = code.k();
    let pairs = hr_pairs(&code.block_basis)?;
    let hr = hr_cut(k, &pairs, &code.units)?;
    let order = hr.order();
    let n_d = analysis_receive_antennas(code);
    let mask = zero_mask(&code.complex_basis(), &order, n_d, trials, tol, seed)?;
    let cut = mask_cut(&mask, &order, &code.units);
    let threshold = k.saturating_sub(1);
    let empirical_ok = trials >= MIN_CERTIFYING_TRIALS && tol <= CERTIFYING_TOL;
    let fast_decodable = hr.exponent < threshold || (empirical_ok && cut.exponent < threshold);
    Ok(FdReport {
        code: code.name.clone(),
        k,
        trials,
        tol,
        seed,
        receive_antennas: n_d,
        units: code.units.clone(),
        order,
        zero_mask: mask,
        hr_pairs: pairs,
        hr_exponent: hr.exponent,
        complexity_exponent: cut.exponent,
        groups: cut.groups,
        conditioning: cut.conditioning,
        fast_decodable,
    })
}

/// `0` marks a certified zero, `x` a non-zero entry, `.` the strict lower triangle.
pub fn mask_grid(mask: &[Vec<bool>]) -> String {
    let mut s = String::new();
    for (a, row) in mask.iter().enumerate() {
        let line: String = row
            .iter()
            .enumerate()
            .map(|(b, &z)| match (b < a, z) {
                (true, _) => '.',
                (false, true) => '0',
                (false, false) => 'x',
            })
            .collect();
        s.push_str(&line);
        s.push('\n');
    }
    s
}

/// Mask re-indexed by basis coefficient instead of decoding position.
pub fn mask_by_coefficient(mask: &[Vec<bool>], order: &[usize]) -> DMatrix<bool> {
    let k = order.len();
    DMatrix::from_fn(k, k, |i, j| {
        let (p, q) = (order.iter().position(|&v| v == i).unwrap(), order.iter().position(|&v| v == j).unwrap());
        p < q && mask[p][q]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{build_lattice, CodeName};
    use crate::exactfield::{golden_field, FieldElement};

    /// Alamouti basis over Q(i, √5): real and imaginary parts of two symbols.
    pub(crate) fn alamouti() -> STCodeLattice {
        let f = golden_field();
        let e = |v: &[i64]| FieldElement::from_ints(&f, v).unwrap();
        let m = |a: [i64; 2], b: [i64; 2], c: [i64; 2], d: [i64; 2]| {
            ExactMatrix::from_rows(vec![
                vec![e(&[a[0], a[1], 0, 0]), e(&[b[0], b[1], 0, 0])],
                vec![e(&[c[0], c[1], 0, 0]), e(&[d[0], d[1], 0, 0])],
            ])
            .unwrap()
        };
        let basis = vec![
            m([1, 0], [0, 0], [0, 0], [1, 0]),
            m([0, 1], [0, 0], [0, 0], [0, -1]),
            m([0, 0], [-1, 0], [1, 0], [0, 0]),
            m([0, 0], [0, 1], [0, 1], [0, 0]),
        ];
        STCodeLattice::new("alamouti", basis, 1, vec![-1, 1]).unwrap()
    }

    #[test]
    fn alamouti_is_fully_decoupled() {
        let code = alamouti();
        let rep = fd_analyze(&code, 20, 1e-9, 1).unwrap();
        assert_eq!(rep.hr_pairs.len(), 6);
        assert_eq!(rep.hr_exponent, 1);
        assert_eq!(rep.complexity_exponent, 1);
        for a in 0..4 {
            for b in a + 1..4 {
                assert!(rep.zero_mask[a][b]);
            }
        }
        assert!(rep.fast_decodable);
        assert_eq!(mask_grid(&rep.zero_mask), "x000\n.x00\n..x0\n...x\n");
    }

    #[test]
    fn diagonal_pairs_never_listed() {
        let code = build_lattice(CodeName::Golden).unwrap();
        let pairs = hr_pairs(&code.block_basis).unwrap();
        assert!(pairs.iter().all(|(i, j)| i < j));
        let numeric = hr_pairs_numeric(&code.complex_block_basis(), 1e-12);
        assert_eq!(pairs, numeric);
    }

    #[test]
    fn dense_mask_gives_trivial_exponent() {
        let k = 4;
        let mask = vec![vec![false; k]; k];
        let units: Vec<Vec<usize>> = (0..k).map(|j| vec![j]).collect();
        let cut = mask_cut(&mask, &[0, 1, 2, 3], &units);
        assert_eq!(cut.exponent, 4);
        let cut = hr_cut(k, &[], &units).unwrap();
        assert_eq!(cut.exponent, 4);
    }

    #[test]
    fn mask_cut_respects_units() {
        // positions 0 and 1 decouple, but they share a unit with position 2
        let mut mask = vec![vec![false; 3]; 3];
        mask[0][1] = true;
        let cut = mask_cut(&mask, &[0, 1, 2], &[vec![0, 1, 2]]);
        assert_eq!(cut.exponent, 3);
        let cut = mask_cut(&mask, &[0, 1, 2], &[vec![0], vec![1], vec![2]]);
        assert_eq!(cut.exponent, 2);
        assert_eq!(cut.groups, vec![vec![0], vec![1]]);
        assert_eq!(cut.conditioning, vec![2]);
    }

    #[test]
    fn coefficient_view_of_mask() {
        let mut mask = vec![vec![false; 2]; 2];
        mask[0][1] = true;
        let m = mask_by_coefficient(&mask, &[1, 0]);
        assert!(m[(1, 0)] && !m[(0, 1)]);
    }
}
