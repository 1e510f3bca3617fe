//! Two-agent exchange kernel and the wealth-window predicates.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::Wealth;

/// Closed interval of partner wealths admissible for an agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransactionWindow {
    pub lo: f64,
    pub hi: f64,
}

impl TransactionWindow {
    #[inline]
    pub fn contains(&self, w: f64) -> bool {
        self.lo <= w && w <= self.hi
    }
}

/// `[max(0, w(1−β)), w(1+β)]`.
pub fn transaction_window(w: Wealth, beta: f64) -> Result<TransactionWindow> {
    check_beta(beta)?;
    Ok(window_unchecked(w.get(), beta))
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidBeta(beta))
    }
}

#[inline]
pub(crate) fn window_unchecked(w: f64, beta: f64) -> TransactionWindow {
    let lo = w * (1.0 - beta);
    TransactionWindow {
        lo: if lo > 0.0 { lo } else { 0.0 },
        hi: w * (1.0 + beta),
    }
}

/// Whether `w_j` lies in the window of an agent holding `w_i`.
#[inline]
pub fn in_range(w_i: f64, w_j: f64, beta: f64) -> bool {
    window_unchecked(w_i, beta).contains(w_j)
}

/// Both agents lie within each other's window. Symmetric in its arguments.
#[inline]
pub fn mutual_in_range(w_i: f64, w_j: f64, beta: f64) -> bool {
    in_range(w_i, w_j, beta) && in_range(w_j, w_i, beta)
}

/// Which agent of a pair wins the exchange.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

/// Random inputs of one exchange: the winner and the fraction of the
/// loser's wealth that changes hands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangeDraw {
    pub winner: Side,
    pub stake_fraction: f64,
}

impl ExchangeDraw {
    /// Draws a fair coin first, then the stake fraction from `[0, 1)`.
    ///
    /// Only the loser's stake is ever transferred, so drawing a single
    /// fraction after the coin is distributionally the same as drawing a
    /// stake for both agents and discarding the winner's.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let winner = if rng.random::<bool>() {
            Side::First
        } else {
            Side::Second
        };
        ExchangeDraw {
            winner,
            stake_fraction: rng.random::<f64>(),
        }
    }
}

/// Moves `stake_fraction · w_loser` from the loser to the winner.
///
/// The fraction is clamped to `[0, 1]`, so the loser never ends up negative.
pub fn transact(w_i: f64, w_j: f64, draw: ExchangeDraw) -> (f64, f64) {
    debug_assert!(w_i >= 0.0 && w_j >= 0.0);
    let f = draw.stake_fraction.clamp(0.0, 1.0);
    match draw.winner {
        Side::First => {
            let dw = f * w_j;
            (w_i + dw, w_j - dw)
        }
        Side::Second => {
            let dw = f * w_i;
            (w_i - dw, w_j + dw)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn win(w: f64, b: f64) -> (f64, f64) {
        let t = transaction_window(Wealth::new(w).unwrap(), b).unwrap();
        (t.lo, t.hi)
    }

    #[test]
    fn windows() {
        let (lo, hi) = win(1000.0, 0.1);
        assert!((lo - 900.0).abs() < 1e-9 && (hi - 1100.0).abs() < 1e-9);
        assert_eq!(win(1000.0, 1.0), (0.0, 2000.0));
        assert_eq!(win(0.0, 0.5), (0.0, 0.0));
        assert_eq!(win(10.0, 1.5), (0.0, 25.0));
        assert_eq!(
            transaction_window(Wealth::ZERO, 0.0),
            Err(Error::InvalidBeta(0.0))
        );
        assert!(transaction_window(Wealth::ZERO, -0.2).is_err());
    }

    #[test]
    fn range_checks() {
        // 1000·1.1 rounds to 1100.0000000000002, so 1100 is inside.
        assert!(in_range(1000.0, 1100.0, 0.1));
        assert!(!in_range(1000.0, 1100.01, 0.1));
        assert!(in_range(0.0, 0.0, 0.3));
        assert!(!in_range(0.0, 1e-300, 0.3));
    }

    #[test]
    fn mutual_checks() {
        assert!(mutual_in_range(1000.0, 1500.0, 0.5));
        assert!(!mutual_in_range(1000.0, 1500.0, 0.4));
        assert!(mutual_in_range(500.0, 900.0, 0.8));
        assert!(mutual_in_range(900.0, 500.0, 0.8));
    }

    #[test]
    fn asymmetric_witness() {
        // 80's window [40, 120] misses 150; 150's window [75, 225] holds 80.
        assert!(!in_range(80.0, 150.0, 0.5));
        assert!(in_range(150.0, 80.0, 0.5));
        assert!(!mutual_in_range(80.0, 150.0, 0.5));
    }

    #[test]
    fn transact_examples() {
        let d = |winner, f| ExchangeDraw {
            winner,
            stake_fraction: f,
        };
        assert_eq!(transact(100.0, 50.0, d(Side::First, 0.6)), (130.0, 20.0));
        assert_eq!(transact(0.0, 0.0, d(Side::Second, 0.3)), (0.0, 0.0));
        assert_eq!(transact(200.0, 300.0, d(Side::Second, 1.0)), (0.0, 500.0));
        assert_eq!(transact(200.0, 300.0, d(Side::Second, 7.0)), (0.0, 500.0));
    }

    #[test]
    fn fair_coin() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let first = (0..n)
            .filter(|_| ExchangeDraw::sample(&mut rng).winner == Side::First)
            .count();
        let freq = first as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.01, "freq = {freq}");
    }
}
