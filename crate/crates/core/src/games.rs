//! Two-player nonlocal games: strategies, correlations, win probabilities and the
//! broadcast rates needed to coordinate a strategy's answers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::validate_distribution;
use crate::error::{Error, Result};
use crate::qla::linalg::{hermitian_eigenvalues, max_abs_diff, real, CMatrix};
use crate::qla::{DensityOperator, PureState, SystemLayout};
use crate::regions::{broadcast_bounds, ClassicalQuantumState, RateBoundReport};
use crate::tolerance::TOL;

/// Largest number of deterministic strategy pairs searched by [`classical_value`].
pub const CLASSICAL_SEARCH_LIMIT: f64 = 1e7;

/// Question and answer alphabets, question distribution and winning predicate.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec {
    x_size: usize,
    y_size: usize,
    b_size: usize,
    c_size: usize,
    p_xy: Vec<f64>,
    win: Vec<bool>,
}

/// File form of a game. `win[x][y][b][c]` is 0 or 1; `p_xy` defaults to uniform.
/// An optional `correlation[x][y][b][c]` can be evaluated against the game.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameFile {
    pub x: usize,
    pub y: usize,
    pub b: usize,
    pub c: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_xy: Option<Vec<Vec<f64>>>,
    pub win: Vec<Vec<Vec<Vec<u8>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation: Option<Vec<Vec<Vec<Vec<f64>>>>>,
}

impl GameSpec {
    pub fn new(sizes: [usize; 4], p_xy: Vec<f64>, win: Vec<bool>) -> Result<Self> {
        let [x_size, y_size, b_size, c_size] = sizes;
        if sizes.contains(&0) {
            return Err(Error::InvalidParameter("alphabets must be non-empty".into()));
        }
        if p_xy.len() != x_size * y_size || win.len() != x_size * y_size * b_size * c_size {
            return Err(Error::DimensionMismatch("question distribution or predicate has the wrong size".into()));
        }
        validate_distribution(&p_xy)?;
        Ok(Self { x_size, y_size, b_size, c_size, p_xy, win })
    }

    /// Uniform questions and a predicate given as a function of `(x, y, b, c)`.
    pub fn uniform(sizes: [usize; 4], predicate: impl Fn(usize, usize, usize, usize) -> bool) -> Result<Self> {
        let [xs, ys, bs, cs] = sizes;
        let mut win = Vec::with_capacity(xs * ys * bs * cs);
        for x in 0..xs {
            for y in 0..ys {
                for b in 0..bs {
                    for c in 0..cs {
                        win.push(predicate(x, y, b, c));
                    }
                }
            }
        }
        Self::new(sizes, vec![1.0 / (xs * ys) as f64; xs * ys], win)
    }

    /// CHSH: win iff `x AND y = b XOR c`.
    pub fn chsh() -> Self {
        Self::uniform([2, 2, 2, 2], |x, y, b, c| (x & y) == (b ^ c)).expect("valid game")
    }

    /// Mermin-Peres magic square. Bob gets a row, Charlie a column; each answers three
    /// bits (first bit most significant). Bob's bits have even parity, Charlie's odd, and
    /// they agree on the shared cell.
    pub fn magic_square() -> Self {
        let bit = |v: usize, k: usize| (v >> (2 - k)) & 1;
        Self::uniform([3, 3, 8, 8], |x, y, b, c| {
            b.count_ones() % 2 == 0 && c.count_ones() % 2 == 1 && bit(b, y) == bit(c, x)
        })
        .expect("valid game")
    }

    pub fn always_win(sizes: [usize; 4]) -> Result<Self> {
        Self::uniform(sizes, |_, _, _, _| true)
    }

    pub fn sizes(&self) -> [usize; 4] {
        [self.x_size, self.y_size, self.b_size, self.c_size]
    }

    pub fn p_xy(&self, x: usize, y: usize) -> f64 {
        self.p_xy[x * self.y_size + y]
    }

    pub fn wins(&self, x: usize, y: usize, b: usize, c: usize) -> bool {
        self.win[((x * self.y_size + y) * self.b_size + b) * self.c_size + c]
    }

    pub fn from_file(file: &GameFile) -> Result<Self> {
        let sizes = [file.x, file.y, file.b, file.c];
        let p_xy = match &file.p_xy {
            Some(rows) => {
                if rows.len() != file.x || rows.iter().any(|r| r.len() != file.y) {
                    return Err(Error::Parse("p_xy must be an x-by-y table".into()));
                }
                rows.iter().flatten().copied().collect()
            }
            None => vec![1.0 / (file.x * file.y) as f64; file.x * file.y],
        };
        let win = flatten4(&file.win, sizes)?.into_iter().map(|v| v != 0).collect();
        Self::new(sizes, p_xy, win)
    }
}

fn flatten4<T: Copy>(t: &[Vec<Vec<Vec<T>>>], [xs, ys, bs, cs]: [usize; 4]) -> Result<Vec<T>> {
    let shape_ok = t.len() == xs
        && t.iter().all(|a| {
            a.len() == ys && a.iter().all(|b| b.len() == bs && b.iter().all(|c| c.len() == cs))
        });
    if !shape_ok {
        return Err(Error::Parse(format!("table must have shape {xs}x{ys}x{bs}x{cs}")));
    }
    Ok(t.iter().flatten().flatten().flatten().copied().collect())
}

/// `P(b, c | x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    sizes: [usize; 4],
    table: Vec<f64>,
}

impl Correlation {
    /// Validates that each `(x, y)` row is a distribution within `1e-9`.
    pub fn new(sizes: [usize; 4], table: Vec<f64>) -> Result<Self> {
        let [xs, ys, bs, cs] = sizes;
        if table.len() != xs * ys * bs * cs {
            return Err(Error::DimensionMismatch("correlation table has the wrong size".into()));
        }
        for row in table.chunks(bs * cs) {
            validate_distribution(row)?;
        }
        Ok(Self { sizes, table })
    }

    pub fn from_nested(t: &[Vec<Vec<Vec<f64>>>], sizes: [usize; 4]) -> Result<Self> {
        Self::new(sizes, flatten4(t, sizes)?)
    }

    pub fn sizes(&self) -> [usize; 4] {
        self.sizes
    }

    pub fn get(&self, x: usize, y: usize, b: usize, c: usize) -> f64 {
        let [_, ys, bs, cs] = self.sizes;
        self.table[((x * ys + y) * bs + b) * cs + c]
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// `P(. | x, y)` as a `b_size x c_size` row-major block.
    pub fn row(&self, x: usize, y: usize) -> &[f64] {
        let [_, ys, bs, cs] = self.sizes;
        let start = (x * ys + y) * bs * cs;
        &self.table[start..start + bs * cs]
    }

    pub fn nested(&self) -> Vec<Vec<Vec<Vec<f64>>>> {
        let [xs, ys, bs, cs] = self.sizes;
        (0..xs)
            .map(|x| (0..ys).map(|y| (0..bs).map(|b| (0..cs).map(|c| self.get(x, y, b, c)).collect()).collect()).collect())
            .collect()
    }

    /// Convex combination `lambda P + (1 - lambda) Q`.
    pub fn mix(&self, other: &Correlation, lambda: f64) -> Result<Correlation> {
        if self.sizes != other.sizes {
            return Err(Error::DimensionMismatch("mixing correlations of different shapes".into()));
        }
        let table = self.table.iter().zip(&other.table).map(|(p, q)| lambda * p + (1.0 - lambda) * q).collect();
        Ok(Self { sizes: self.sizes, table })
    }

    /// Largest change of a local marginal under a change of the other party's question.
    pub fn no_signaling_residual(&self) -> f64 {
        let [xs, ys, bs, cs] = self.sizes;
        let mut worst = 0.0f64;
        for x in 0..xs {
            for b in 0..bs {
                let m: Vec<f64> = (0..ys).map(|y| (0..cs).map(|c| self.get(x, y, b, c)).sum()).collect();
                worst = worst.max(m.iter().fold(f64::MIN, |a, &v| a.max(v)) - m.iter().fold(f64::MAX, |a, &v| a.min(v)));
            }
        }
        for y in 0..ys {
            for c in 0..cs {
                let m: Vec<f64> = (0..xs).map(|x| (0..bs).map(|b| self.get(x, y, b, c)).sum()).collect();
                worst = worst.max(m.iter().fold(f64::MIN, |a, &v| a.max(v)) - m.iter().fold(f64::MAX, |a, &v| a.min(v)));
            }
        }
        worst
    }
}

/// Shared state on `M1, M2` with one POVM per question on each side.
#[derive(Debug, Clone)]
pub struct Strategy {
    state: DensityOperator,
    bob: Vec<Vec<CMatrix>>,
    charlie: Vec<Vec<CMatrix>>,
}

fn check_povm(elements: &[CMatrix], dim: usize, what: &str) -> Result<()> {
    let mut sum = CMatrix::zeros(dim, dim);
    for (k, e) in elements.iter().enumerate() {
        if e.nrows() != dim || e.ncols() != dim {
            return Err(Error::DimensionMismatch(format!("{what} element {k} is not {dim}x{dim}")));
        }
        let herm = max_abs_diff(e, &e.adjoint());
        if herm > TOL.cptp {
            return Err(Error::InvalidPovm { what: format!("{what} element {k} is not Hermitian"), residual: herm });
        }
        let min = hermitian_eigenvalues(e).last().copied().unwrap_or(0.0);
        if min < -TOL.cptp {
            return Err(Error::InvalidPovm { what: format!("{what} element {k} is not positive"), residual: -min });
        }
        sum += e;
    }
    let residual = max_abs_diff(&sum, &CMatrix::identity(dim, dim));
    if residual > TOL.cptp {
        return Err(Error::InvalidPovm { what: format!("{what} elements do not sum to the identity"), residual });
    }
    Ok(())
}

impl Strategy {
    /// `state` must live on `M1, M2` (in that order); `bob[x][b]`, `charlie[y][c]`.
    pub fn new(state: DensityOperator, bob: Vec<Vec<CMatrix>>, charlie: Vec<Vec<CMatrix>>) -> Result<Self> {
        let labels = state.layout().labels();
        if labels != ["M1", "M2"] {
            return Err(Error::Labeling(format!("strategy state must live on M1, M2; got {labels:?}")));
        }
        let dims = state.layout().dims();
        for (x, povm) in bob.iter().enumerate() {
            check_povm(povm, dims[0], &format!("Bob's POVM for x = {x}"))?;
        }
        for (y, povm) in charlie.iter().enumerate() {
            check_povm(povm, dims[1], &format!("Charlie's POVM for y = {y}"))?;
        }
        if bob.iter().any(|p| p.len() != bob[0].len()) || charlie.iter().any(|p| p.len() != charlie[0].len()) {
            return Err(Error::DimensionMismatch("every POVM of a party needs the same number of outcomes".into()));
        }
        Ok(Self { state, bob, charlie })
    }

    pub fn state(&self) -> &DensityOperator {
        &self.state
    }

    pub fn m1_dim(&self) -> usize {
        self.state.layout().dims()[0]
    }

    pub fn m2_dim(&self) -> usize {
        self.state.layout().dims()[1]
    }

    /// `[|X|, |Y|, |B|, |C|]` as implied by the POVMs.
    pub fn sizes(&self) -> [usize; 4] {
        [self.bob.len(), self.charlie.len(), self.bob[0].len(), self.charlie[0].len()]
    }
}

fn projector_pm(o: &CMatrix, bit: usize) -> CMatrix {
    let id = CMatrix::identity(o.nrows(), o.ncols());
    let sign = if bit == 0 { 1.0 } else { -1.0 };
    (id + o.scale(sign)).scale(0.5)
}

fn pauli(which: char) -> CMatrix {
    let z = real(0.0);
    let one = real(1.0);
    let i = crate::qla::linalg::c(0.0, 1.0);
    match which {
        'I' => CMatrix::from_row_slice(2, 2, &[one, z, z, one]),
        'X' => CMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        'Y' => CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        'Z' => CMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
        _ => unreachable!("not a Pauli label"),
    }
}

fn pauli_pair(s: &str) -> CMatrix {
    let (sign, body) = s.strip_prefix('-').map_or((1.0, s), |b| (-1.0, b));
    let mut chars = body.chars();
    let (a, b) = (chars.next().expect("two letters"), chars.next().expect("two letters"));
    pauli(a).kronecker(&pauli(b)).scale(sign)
}

fn epr(m: usize) -> PureState {
    // sum_i |i>_{M1} |i>_{M2} / sqrt(m)
    let mut v = crate::qla::CVector::zeros(m * m);
    for i in 0..m {
        v[i * m + i] = real(1.0 / (m as f64).sqrt());
    }
    PureState::new(SystemLayout::from_pairs(&[("M1", m), ("M2", m)]).expect("small"), v).expect("normalized")
}

/// EPR pair; Bob measures `Z` or `X`, Charlie `(Z + X)/sqrt2` or `(Z - X)/sqrt2`.
/// Outcome 0 is the `+1` eigenvalue.
pub fn chsh_strategy() -> Strategy {
    let (z, x) = (pauli('Z'), pauli('X'));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let obs_b = [z.clone(), x.clone()];
    let obs_c = [(&z + &x).scale(s), (&z - &x).scale(s)];
    let povm = |o: &CMatrix| vec![projector_pm(o, 0), projector_pm(o, 1)];
    Strategy::new(epr(2).to_density(), obs_b.iter().map(povm).collect(), obs_c.iter().map(povm).collect())
        .expect("valid CHSH strategy")
}

/// The observable square; rows multiply to `+1`, columns to `-1`.
pub const MAGIC_SQUARE: [[&str; 3]; 3] = [["XI", "IX", "XX"], ["IZ", "ZI", "ZZ"], ["-XZ", "-ZX", "YY"]];

/// Two EPR pairs (`M1`, `M2` of dimension 4). Bob measures the three commuting
/// observables of row `x`, Charlie those of column `y`; every entry of the square is
/// invariant under transposition, so both sides use the same operators.
pub fn magic_square_strategy() -> Strategy {
    let answer_projectors = |obs: [CMatrix; 3]| -> Vec<CMatrix> {
        (0..8)
            .map(|v| {
                (0..3).fold(CMatrix::identity(4, 4), |acc, k| acc * projector_pm(&obs[k], (v >> (2 - k)) & 1))
            })
            .collect()
    };
    let bob = (0..3)
        .map(|r| answer_projectors([0, 1, 2].map(|k| pauli_pair(MAGIC_SQUARE[r][k]))))
        .collect();
    let charlie = (0..3)
        .map(|c| answer_projectors([0, 1, 2].map(|k| pauli_pair(MAGIC_SQUARE[k][c]))))
        .collect();
    Strategy::new(epr(4).to_density(), bob, charlie).expect("valid magic-square strategy")
}

fn check_shape(game: &GameSpec, sizes: [usize; 4]) -> Result<()> {
    if game.sizes() != sizes {
        return Err(Error::DimensionMismatch(format!(
            "game alphabets {:?} do not match {:?}",
            game.sizes(),
            sizes
        )));
    }
    Ok(())
}

/// `P(b, c | x, y) = Tr[(F_b^(x) (x) D_c^(y)) rho]`.
pub fn correlation_from_strategy(game: &GameSpec, strategy: &Strategy) -> Result<Correlation> {
    check_shape(game, strategy.sizes())?;
    let [xs, ys, bs, cs] = strategy.sizes();
    let rho = strategy.state.matrix();
    let mut table = Vec::with_capacity(xs * ys * bs * cs);
    for x in 0..xs {
        for y in 0..ys {
            for b in 0..bs {
                for c in 0..cs {
                    let op = strategy.bob[x][b].kronecker(&strategy.charlie[y][c]);
                    let p = (op * rho).trace().re;
                    table.push(p.max(0.0));
                }
            }
        }
    }
    Correlation::new(game.sizes(), table)
}

/// `sum_{x,y} p(x,y) sum_{b,c} W(x,y,b,c) P(b,c|x,y)`.
pub fn win_probability(game: &GameSpec, corr: &Correlation) -> Result<f64> {
    check_shape(game, corr.sizes())?;
    let [xs, ys, bs, cs] = game.sizes();
    let mut total = 0.0;
    for x in 0..xs {
        for y in 0..ys {
            let mut w = 0.0;
            for b in 0..bs {
                for c in 0..cs {
                    if game.wins(x, y, b, c) {
                        w += corr.get(x, y, b, c);
                    }
                }
            }
            total += game.p_xy(x, y) * w;
        }
    }
    Ok(total)
}

/// Best win probability over deterministic answer functions, by exhaustive search.
pub fn classical_value(game: &GameSpec) -> Result<f64> {
    let [xs, ys, bs, cs] = game.sizes();
    let nb = (bs as f64).powi(xs as i32);
    let nc = (cs as f64).powi(ys as i32);
    if nb * nc > CLASSICAL_SEARCH_LIMIT {
        return Err(Error::GuardExceeded {
            what: "deterministic strategy pairs".into(),
            value: nb * nc,
            limit: CLASSICAL_SEARCH_LIMIT,
        });
    }
    let decode = |mut v: usize, len: usize, base: usize| -> Vec<usize> {
        let mut out = vec![0; len];
        for slot in out.iter_mut().rev() {
            *slot = v % base;
            v /= base;
        }
        out
    };
    let charlie: Vec<Vec<usize>> = (0..nc as usize).map(|g| decode(g, ys, cs)).collect();
    let best = (0..nb as usize)
        .into_par_iter()
        .map(|f| {
            let answers_b = decode(f, xs, bs);
            charlie
                .iter()
                .map(|answers_c| {
                    let mut v = 0.0;
                    for x in 0..xs {
                        for y in 0..ys {
                            if game.wins(x, y, answers_b[x], answers_c[y]) {
                                v += game.p_xy(x, y);
                            }
                        }
                    }
                    v
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

/// Broadcast rates `(S(B|X), S(C|Y))` for coordinating the answers of `corr`, i.e. for
/// the cq state `sum p(x,y) |xy><xy| (x) sum_{b,c} P(b,c|x,y) |bc><bc|` with trivial `A`.
pub fn rates_for_correlation(game: &GameSpec, corr: &Correlation) -> Result<RateBoundReport> {
    check_shape(game, corr.sizes())?;
    let [xs, ys, bs, cs] = game.sizes();
    let quantum = SystemLayout::from_pairs(&[("A", 1), ("B", bs), ("C", cs)])?;
    let mut states = Vec::with_capacity(xs * ys);
    let mut probs = Vec::with_capacity(xs * ys);
    for x in 0..xs {
        for y in 0..ys {
            states.push(DensityOperator::diagonal(quantum.clone(), corr.row(x, y))?);
            probs.push(game.p_xy(x, y));
        }
    }
    let cq = ClassicalQuantumState::new(SystemLayout::from_pairs(&[("X", xs), ("Y", ys)])?, probs, states)?;
    broadcast_bounds(&cq)
}

pub fn required_broadcast_rates(game: &GameSpec, strategy: &Strategy) -> Result<RateBoundReport> {
    rates_for_correlation(game, &correlation_from_strategy(game, strategy)?)
}

/// Everything known about a strategy for a game.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameAnalysis {
    pub win_probability: f64,
    pub classical_value: f64,
    pub correlation: Vec<Vec<Vec<Vec<f64>>>>,
    pub required_rates: RateBoundReport,
    pub m1_dim: usize,
    pub m2_dim: usize,
}

pub fn analyze(game: &GameSpec, strategy: &Strategy) -> Result<GameAnalysis> {
    let corr = correlation_from_strategy(game, strategy)?;
    Ok(GameAnalysis {
        win_probability: win_probability(game, &corr)?,
        classical_value: classical_value(game)?,
        required_rates: rates_for_correlation(game, &corr)?,
        correlation: corr.nested(),
        m1_dim: strategy.m1_dim(),
        m2_dim: strategy.m2_dim(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn magic_square_rows_and_columns() {
        let id = CMatrix::identity(4, 4);
        for r in 0..3 {
            let p = (0..3).fold(id.clone(), |acc, k| acc * pauli_pair(MAGIC_SQUARE[r][k]));
            assert!(max_abs_diff(&p, &id) < 1e-15);
        }
        for c in 0..3 {
            let p = (0..3).fold(id.clone(), |acc, k| acc * pauli_pair(MAGIC_SQUARE[k][c]));
            assert!(max_abs_diff(&p, &id.scale(-1.0)) < 1e-15);
        }
        for row in MAGIC_SQUARE {
            for s in row {
                let o = pauli_pair(s);
                assert!(max_abs_diff(&o, &o.transpose()) < 1e-15);
            }
        }
    }

    #[test]
    fn rejects_bad_povm() {
        let half = CMatrix::identity(2, 2).scale(0.5);
        let err = Strategy::new(epr(2).to_density(), vec![vec![half.clone()]], vec![vec![half.clone(), half]])
            .unwrap_err();
        assert!(matches!(err, Error::InvalidPovm { residual, .. } if (residual - 0.5).abs() < 1e-15));
    }
}
