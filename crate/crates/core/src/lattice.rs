//! Mordell-Weil lattice computations: Gram matrix, regulator, successive
//! minima, and the Minkowski product inequality.
//!
//! Heights from the points module are exact rationals, so everything here is
//! exact: the Gram matrix, the regulator determinant, the independence
//! certificate (det > 0 as a rational), and the minima, which are reported as
//! exact squared values. Square roots only appear when a report needs a
//! decimal rendering, and the Minkowski comparison is done on squares.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::points::{torsion_order, CurvePoint, HeightEngine};

/// Default cap on the rank for exhaustive minima enumeration.
pub const RANK_CAP: usize = 4;

/// Points with certified-independent span and their exact pairing data.
#[derive(Clone, Debug)]
pub struct MordellWeilLattice {
    points: Vec<CurvePoint>,
    gram: Vec<Vec<BigRational>>,
    regulator: BigRational,
}

impl MordellWeilLattice {
    pub fn rank(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn gram(&self) -> &[Vec<BigRational>] {
        &self.gram
    }

    /// det of the Gram matrix; exactly 1 for the empty lattice.
    pub fn regulator(&self) -> &BigRational {
        &self.regulator
    }

    /// The generators are searched, not saturated: they may span a
    /// finite-index sublattice, in which case the regulator overestimates by
    /// the index squared. Always flagged for positive rank.
    pub fn sublattice_caveat(&self) -> bool {
        !self.points.is_empty()
    }
}

/// Assemble a lattice from torsion-free points, certifying independence by a
/// positive Gram determinant.
pub fn build_lattice(
    engine: &HeightEngine,
    points: Vec<CurvePoint>,
    tol: &BigRational,
) -> Result<MordellWeilLattice> {
    for p in &points {
        if torsion_order(p)?.is_some() {
            return Err(Error::domain(format!(
                "torsion point {p} cannot enter the lattice"
            )));
        }
    }
    let r = points.len();
    let mut gram = vec![vec![BigRational::zero(); r]; r];
    for i in 0..r {
        for j in i..r {
            let v = engine.pairing(&points[i], &points[j], tol)?.value;
            gram[i][j] = v.clone();
            gram[j][i] = v;
        }
    }
    for (i, row) in gram.iter().enumerate() {
        if !row[i].is_positive() {
            return Err(Error::internal(format!(
                "nonpositive diagonal pairing at index {i}"
            )));
        }
    }
    let regulator = det_rational(&gram);
    if regulator.is_zero() {
        return Err(Error::domain(
            "independence not certified: Gram determinant vanishes",
        ));
    }
    if regulator.is_negative() {
        return Err(Error::internal(
            "negative Gram determinant for a height pairing",
        ));
    }
    Ok(MordellWeilLattice {
        points,
        gram,
        regulator,
    })
}

/// Greedy independent subset: candidates in ascending height order are kept
/// while they strictly enlarge the span (positive Gram determinant). Torsion
/// candidates are skipped.
pub fn independent_subset(
    engine: &HeightEngine,
    candidates: &[CurvePoint],
    tol: &BigRational,
) -> Result<Vec<CurvePoint>> {
    let mut free: Vec<(BigRational, CurvePoint)> = vec![];
    for p in candidates {
        if torsion_order(p)?.is_none() {
            let h = engine.canonical_height(p, tol)?.value;
            free.push((h, p.clone()));
        }
    }
    free.sort_by(|a, b| a.0.cmp(&b.0));
    let mut chosen: Vec<CurvePoint> = vec![];
    for (_, p) in free {
        let mut trial = chosen.clone();
        trial.push(p);
        if build_lattice(engine, trial.clone(), tol).is_ok() {
            chosen = trial;
        }
    }
    Ok(chosen)
}

fn det_rational(m: &[Vec<BigRational>]) -> BigRational {
    let n = m.len();
    if n == 0 {
        return BigRational::one();
    }
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut det = BigRational::one();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero());
        let pivot = match pivot {
            Some(p) => p,
            None => return BigRational::zero(),
        };
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &p;
            for c in col..n {
                let delta = &factor * &a[col][c];
                a[r][c] -= delta;
            }
        }
    }
    det
}

/// Successive minima of the quadratic form, as exact squared values with the
/// achieving coordinate vectors (one representative of each +/- pair).
#[derive(Clone, Debug)]
pub struct MinimaProfile {
    pub lambda_squares: Vec<BigRational>,
    pub vectors: Vec<Vec<i64>>,
}

pub fn successive_minima(lattice: &MordellWeilLattice, r_cap: usize) -> Result<MinimaProfile> {
    if lattice.rank() > r_cap {
        return Err(Error::resource(format!(
            "rank {} exceeds the enumeration cap {r_cap}",
            lattice.rank()
        )));
    }
    minima_of_gram(lattice.gram())
}

/// Minima of an explicit positive-definite Gram matrix.
pub fn minima_of_gram(gram: &[Vec<BigRational>]) -> Result<MinimaProfile> {
    let r = gram.len();
    if r == 0 {
        return Ok(MinimaProfile {
            lambda_squares: vec![],
            vectors: vec![],
        });
    }
    let diag_min = (0..r).map(|i| gram[i][i].clone()).min().unwrap();
    let diag_max = (0..r).map(|i| gram[i][i].clone()).max().unwrap();
    let mut bound = diag_min;
    loop {
        let mut found = enumerate_below(gram, &bound)?;
        found.sort_by(|a, b| a.0.cmp(&b.0));
        let mut basis: Vec<Vec<i64>> = vec![];
        let mut lambda_squares = vec![];
        for (value, v) in &found {
            if extends_span(&basis, v) {
                basis.push(v.clone());
                lambda_squares.push(value.clone());
                if basis.len() == r {
                    return Ok(MinimaProfile {
                        lambda_squares,
                        vectors: basis,
                    });
                }
            }
        }
        // the standard basis realizes r independent vectors at the max
        // diagonal, so the doubling loop is guaranteed to terminate
        debug_assert!(bound <= BigRational::from_integer(BigInt::from(2)) * &diag_max);
        bound = bound * BigRational::from_integer(BigInt::from(2));
    }
}

/// All nonzero integer vectors with form value <= bound, one per +/- pair,
/// via exact LDL^T Fincke-Pohst enumeration.
fn enumerate_below(
    gram: &[Vec<BigRational>],
    bound: &BigRational,
) -> Result<Vec<(BigRational, Vec<i64>)>> {
    let r = gram.len();
    let (l, d) = ldlt(gram)?;
    let mut out = vec![];
    let mut v = vec![0i64; r];
    descend(gram, &l, &d, bound, r, &mut v, &mut out);
    Ok(out)
}

/// Exact LDL^T of a positive-definite matrix: unit lower-triangular L and
/// positive diagonal D with G = L D L^T.
fn ldlt(gram: &[Vec<BigRational>]) -> Result<(Vec<Vec<BigRational>>, Vec<BigRational>)> {
    let r = gram.len();
    let mut l = vec![vec![BigRational::zero(); r]; r];
    let mut d = vec![BigRational::zero(); r];
    for j in 0..r {
        let mut dj = gram[j][j].clone();
        for k in 0..j {
            dj -= &l[j][k] * &l[j][k] * &d[k];
        }
        if !dj.is_positive() {
            return Err(Error::internal(
                "Gram matrix is not positive definite in LDL^T",
            ));
        }
        d[j] = dj;
        l[j][j] = BigRational::one();
        for i in j + 1..r {
            let mut v = gram[i][j].clone();
            for k in 0..j {
                v -= &l[i][k] * &l[j][k] * &d[k];
            }
            l[i][j] = v / &d[j];
        }
    }
    Ok((l, d))
}

/// Recursive level of the enumeration: coordinates v[level..] are fixed;
/// Q(v) = sum_i d_i (v_i + sum_{j>i} l[j][i] v_j)^2.
fn descend(
    gram: &[Vec<BigRational>],
    l: &[Vec<BigRational>],
    d: &[BigRational],
    bound: &BigRational,
    level: usize,
    v: &mut Vec<i64>,
    out: &mut Vec<(BigRational, Vec<i64>)>,
) {
    if level == 0 {
        if v.iter().all(|&c| c == 0) {
            return;
        }
        // canonical sign: highest-index nonzero coordinate positive
        if v.iter().rev().find(|&&c| c != 0).map(|&c| c < 0).unwrap() {
            return;
        }
        let value = form_value(gram, v);
        if &value <= bound {
            out.push((value, v.clone()));
        }
        return;
    }
    let i = level - 1;
    // remaining budget after the already-fixed outer coordinates
    let mut rem = bound.clone();
    for k in level..v.len() {
        let mut w = BigRational::from_integer(BigInt::from(v[k]));
        for j in k + 1..v.len() {
            w += &l[j][k] * BigRational::from_integer(BigInt::from(v[j]));
        }
        rem -= &d[k] * &w * &w;
    }
    if rem.is_negative() {
        return;
    }
    let mut center = BigRational::zero();
    for j in level..v.len() {
        center += &l[j][i] * BigRational::from_integer(BigInt::from(v[j]));
    }
    // d_i (k + center)^2 <= rem delimits a contiguous integer interval
    let admissible = |k: i64| {
        let w = BigRational::from_integer(BigInt::from(k)) + &center;
        &d[i] * &w * &w <= rem
    };
    let start = (-&center).round().to_integer();
    let start = i64::try_from(&start).unwrap_or(0);
    let mut k = start;
    while admissible(k) {
        v[i] = k;
        descend(gram, l, d, bound, i, v, out);
        k += 1;
    }
    k = start - 1;
    while admissible(k) {
        v[i] = k;
        descend(gram, l, d, bound, i, v, out);
        k -= 1;
    }
    v[i] = 0;
}

fn form_value(gram: &[Vec<BigRational>], v: &[i64]) -> BigRational {
    let r = gram.len();
    let mut total = BigRational::zero();
    for i in 0..r {
        for j in 0..r {
            total += &gram[i][j]
                * BigRational::from_integer(BigInt::from(v[i] * v[j]));
        }
    }
    total
}

/// True when v lies outside the rational span of the rows in basis.
fn extends_span(basis: &[Vec<i64>], v: &[i64]) -> bool {
    let mut rows: Vec<Vec<BigRational>> = basis
        .iter()
        .chain(std::iter::once(&v.to_vec()))
        .map(|row| {
            row.iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect()
        })
        .collect();
    let (nrows, ncols) = (rows.len(), v.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..nrows).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let p = rows[rank][col].clone();
        for r in rank + 1..nrows {
            if rows[r][col].is_zero() {
                continue;
            }
            let factor = &rows[r][col] / &p;
            for c in col..ncols {
                let delta = &factor * &rows[rank][c];
                rows[r][c] -= delta;
            }
        }
        rank += 1;
    }
    rank == nrows
}

/// Minkowski product inequality, compared exactly on squares:
/// (λ₁⋯λ_r)² <= r^r · Reg.
#[derive(Clone, Debug)]
pub struct MinkowskiReport {
    pub lhs_squared: BigRational,
    pub rhs_squared: BigRational,
    pub holds: bool,
}

pub fn minkowski_check(lattice: &MordellWeilLattice) -> Result<MinkowskiReport> {
    let r = lattice.rank();
    if r == 0 {
        return Err(Error::domain("Minkowski check needs positive rank"));
    }
    let minima = successive_minima(lattice, RANK_CAP)?;
    let mut lhs_squared = BigRational::one();
    for ls in &minima.lambda_squares {
        lhs_squared *= ls;
    }
    let rr = BigInt::from(r).pow(r as u32);
    let rhs_squared = BigRational::from_integer(rr) * lattice.regulator();
    let holds = lhs_squared <= rhs_squared;
    Ok(MinkowskiReport {
        lhs_squared,
        rhs_squared,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::WeierstrassModel;
    use crate::funcfield::parse_ratfunc;
    use crate::gf::FieldSpec;
    use crate::points::search_points;

    fn f5() -> FieldSpec {
        FieldSpec::prime(5).unwrap()
    }

    fn rf(s: &str) -> crate::funcfield::RatFunc {
        parse_ratfunc(&f5(), s).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn tol() -> BigRational {
        rat(1, 100_000_000)
    }

    fn curve_rank1() -> WeierstrassModel {
        WeierstrassModel::from_short(rf("1"), rf("-t^3+t^2-t")).unwrap()
    }

    fn curve_rank2() -> WeierstrassModel {
        WeierstrassModel::from_short(rf("-t^2+t+2"), rf("1")).unwrap()
    }

    fn rank2_lattice() -> (HeightEngine, MordellWeilLattice) {
        let m = curve_rank2();
        let eng = HeightEngine::new(&m).unwrap();
        let p = m.point(rf("0"), rf("1")).unwrap();
        let q = m.point(rf("t"), rf("t+1")).unwrap();
        let lat = build_lattice(&eng, vec![p, q], &tol()).unwrap();
        (eng, lat)
    }

    #[test]
    fn empty_lattice_regulator_is_one() {
        let m = curve_rank1();
        let eng = HeightEngine::new(&m).unwrap();
        let lat = build_lattice(&eng, vec![], &tol()).unwrap();
        assert_eq!(lat.regulator(), &BigRational::one());
        assert!(!lat.sublattice_caveat());
    }

    #[test]
    fn rank_one_regulator_is_the_height() {
        let m = curve_rank1();
        let eng = HeightEngine::new(&m).unwrap();
        let p = m.point(rf("t"), rf("t")).unwrap();
        let h = eng.canonical_height(&p, &tol()).unwrap().value;
        let lat = build_lattice(&eng, vec![p], &tol()).unwrap();
        assert_eq!(lat.regulator(), &h);
        assert!(lat.sublattice_caveat());
        // rank 1: the minimum is the generator itself
        let minima = successive_minima(&lat, RANK_CAP).unwrap();
        assert_eq!(minima.lambda_squares, vec![h]);
        let mk = minkowski_check(&lat).unwrap();
        assert!(mk.holds);
        assert_eq!(mk.lhs_squared, mk.rhs_squared); // equality at rank 1
    }

    #[test]
    fn dependent_points_are_rejected() {
        let m = curve_rank1();
        let eng = HeightEngine::new(&m).unwrap();
        let p = m.point(rf("t"), rf("t")).unwrap();
        let result = build_lattice(&eng, vec![p.clone(), p.scalar_mul(2)], &tol());
        assert!(matches!(result, Err(Error::Domain(_))));
    }

    #[test]
    fn torsion_points_are_rejected() {
        let m = WeierstrassModel::from_a_invariants(&[
            rf("0"),
            rf("-t-1"),
            rf("0"),
            rf("t"),
            rf("0"),
        ])
        .unwrap();
        let eng = HeightEngine::new(&m).unwrap();
        let t2 = search_points(&m, 1)
            .unwrap()
            .into_iter()
            .find(|p| p.y().unwrap().is_zero())
            .unwrap();
        assert!(matches!(
            build_lattice(&eng, vec![t2], &tol()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn rank_two_lattice_certified() {
        let (_, lat) = rank2_lattice();
        assert_eq!(lat.rank(), 2);
        assert!(lat.regulator().is_positive());
        assert_eq!(lat.gram()[0][1], lat.gram()[1][0]);
        assert!(lat.gram()[0][0].is_positive() && lat.gram()[1][1].is_positive());
    }

    #[test]
    fn minima_match_brute_force_box() {
        let (_, lat) = rank2_lattice();
        let minima = successive_minima(&lat, RANK_CAP).unwrap();
        assert_eq!(minima.lambda_squares.len(), 2);
        assert!(minima.lambda_squares[0] <= minima.lambda_squares[1]);

        // brute force over the coordinate box [-20, 20]^2
        let g = lat.gram();
        let mut best: Option<(BigRational, (i64, i64))> = None;
        let mut values: Vec<(BigRational, (i64, i64))> = vec![];
        for a in -20i64..=20 {
            for b in -20i64..=20 {
                if a == 0 && b == 0 {
                    continue;
                }
                let val = form_value(g, &[a, b]);
                values.push((val.clone(), (a, b)));
                if best.as_ref().map(|(bv, _)| &val < bv).unwrap_or(true) {
                    best = Some((val, (a, b)));
                }
            }
        }
        let (min_val, min_vec) = best.unwrap();
        assert_eq!(minima.lambda_squares[0], min_val);
        // second minimum: smallest value over vectors independent from the first
        values.sort_by(|x, y| x.0.cmp(&y.0));
        let second = values
            .iter()
            .find(|(_, (a, b))| a * min_vec.1 - b * min_vec.0 != 0)
            .unwrap();
        assert_eq!(minima.lambda_squares[1], second.0);
    }

    #[test]
    fn diagonal_gram_minima() {
        let gram = vec![vec![rat(3, 1), rat(0, 1)], vec![rat(0, 1), rat(7, 1)]];
        let minima = minima_of_gram(&gram).unwrap();
        assert_eq!(minima.lambda_squares, vec![rat(3, 1), rat(7, 1)]);
    }

    #[test]
    fn unimodular_change_preserves_invariants() {
        let (eng, lat) = rank2_lattice();
        let p = &lat.points()[0];
        let q = &lat.points()[1];
        // det +1 and det -1 transforms
        for (a, b, c, d) in [(1i64, 1, 0, 1), (2, 1, 1, 1), (0, 1, 1, 0)] {
            let p2 = p.scalar_mul(a).add(&q.scalar_mul(b));
            let q2 = p.scalar_mul(c).add(&q.scalar_mul(d));
            let lat2 = build_lattice(&eng, vec![p2, q2], &tol()).unwrap();
            assert_eq!(lat2.regulator(), lat.regulator(), "transform {a},{b};{c},{d}");
            let m1 = successive_minima(&lat, RANK_CAP).unwrap();
            let m2 = successive_minima(&lat2, RANK_CAP).unwrap();
            assert_eq!(m1.lambda_squares, m2.lambda_squares);
        }
    }

    #[test]
    fn index_two_sublattice_scales_regulator() {
        let (eng, lat) = rank2_lattice();
        let doubled: Vec<_> = lat.points().iter().map(|p| p.scalar_mul(2)).collect();
        let lat2 = build_lattice(&eng, doubled, &tol()).unwrap();
        // [2]Λ has index 4 = 2^r, regulator scales by index^2 = 16 = 4^r
        let scale = BigRational::from_integer(BigInt::from(16));
        assert_eq!(lat2.regulator(), &(scale * lat.regulator()));
    }

    #[test]
    fn minkowski_holds_on_fixtures() {
        let (_, lat) = rank2_lattice();
        let mk = minkowski_check(&lat).unwrap();
        assert!(mk.holds);
        assert!(mk.lhs_squared.is_positive());
    }

    #[test]
    fn rank_cap_enforced() {
        let (_, lat) = rank2_lattice();
        assert!(matches!(
            successive_minima(&lat, 1),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn greedy_subset_finds_independent_points() {
        let m = curve_rank2();
        let eng = HeightEngine::new(&m).unwrap();
        let pts = search_points(&m, 1).unwrap();
        let subset = independent_subset(&eng, &pts, &tol()).unwrap();
        assert!(subset.len() >= 2, "expected rank >= 2 from search, got {}", subset.len());
        let lat = build_lattice(&eng, subset, &tol()).unwrap();
        assert!(lat.regulator().is_positive());
    }
}
