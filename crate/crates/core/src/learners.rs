//! Per-player online learners: vanilla and optimistic Hedge, learning-rate
//! recipes, and the doubling wrapper around the Blum–Mansour learner.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::strategy::{LossVector, MixedStrategy};
use crate::swap::BmState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HedgeVariant {
    /// `x'(j) ∝ x(j)·exp(−η ℓ(j))`
    Vanilla,
    /// `x'(j) ∝ x(j)·exp(−η (2ℓ(j) − ℓ_prev(j)))`
    Optimistic,
}

/// Multiplicative-weights state, kept as log-weights.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgeState {
    variant: HedgeVariant,
    eta: f64,
    log_weights: Vec<f64>,
    strategy: MixedStrategy,
    prev_loss: LossVector,
    cumulative_loss: Vec<f64>,
}

impl HedgeState {
    /// Starts from `initial`, or from the uniform distribution.
    pub fn new(n: usize, eta: f64, variant: HedgeVariant, initial: Option<MixedStrategy>) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Parameter(format!("learning rate must be positive, got {eta}")));
        }
        if n == 0 {
            return Err(Error::Parameter("Hedge needs at least one action".into()));
        }
        let strategy = match initial {
            Some(x) if x.len() != n => {
                return Err(Error::Dimension {
                    what: "initial strategy",
                    expected: n,
                    found: x.len(),
                })
            }
            Some(x) => x,
            None => MixedStrategy::uniform(n),
        };
        let log_weights = strategy.probs().iter().map(|&p| libm::log(p)).collect();
        Ok(HedgeState {
            variant,
            eta,
            log_weights,
            strategy,
            prev_loss: LossVector::zeros(n),
            cumulative_loss: vec![0.0; n],
        })
    }

    pub fn strategy(&self) -> &MixedStrategy {
        &self.strategy
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn variant(&self) -> HedgeVariant {
        self.variant
    }

    /// The loss fed in the previous step (zero before the first step).
    pub fn prev_loss(&self) -> &LossVector {
        &self.prev_loss
    }

    pub fn cumulative_loss(&self) -> &[f64] {
        &self.cumulative_loss
    }

    /// Applies one update with this round's loss vector.
    pub fn step(&mut self, loss: &LossVector) -> Result<()> {
        let n = self.log_weights.len();
        if loss.len() != n {
            return Err(Error::Dimension {
                what: "loss vector",
                expected: n,
                found: loss.len(),
            });
        }
        let eta = self.eta;
        match self.variant {
            HedgeVariant::Vanilla => {
                for (w, l) in self.log_weights.iter_mut().zip(loss.values()) {
                    *w -= eta * l;
                }
            }
            HedgeVariant::Optimistic => {
                let prev = self.prev_loss.values();
                for ((w, l), p) in self.log_weights.iter_mut().zip(loss.values()).zip(prev) {
                    *w -= eta * (2.0 * l - p);
                }
            }
        }
        let max = self.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        self.log_weights.iter_mut().for_each(|w| *w -= max);
        self.strategy = MixedStrategy::from_log_weights(&self.log_weights);
        for (c, l) in self.cumulative_loss.iter_mut().zip(loss.values()) {
            *c += l;
        }
        self.prev_loss = loss.clone();
        Ok(())
    }
}

/// Closed-form learning rates from the convergence theorems. All
/// logarithms are natural and every `O(·)` constant is taken as 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtaTheorem {
    /// Two optimistic-Hedge players: `(ln n / T)^{1/6}`.
    TwoPlayerOptimistic,
    /// Blum–Mansour with optimistic Hedge: `(n ln n / (m² T))^{1/4}`.
    BmSwap,
    /// Swap-matrix meta-expert: `(ln n / (n m² T))^{1/4}`.
    MetaSwap,
}

impl EtaTheorem {
    pub fn name(self) -> &'static str {
        match self {
            EtaTheorem::TwoPlayerOptimistic => "two_player_opt",
            EtaTheorem::BmSwap => "bm_swap",
            EtaTheorem::MetaSwap => "meta_swap",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [EtaTheorem::TwoPlayerOptimistic, EtaTheorem::BmSwap, EtaTheorem::MetaSwap]
            .into_iter()
            .find(|k| k.name() == name)
    }
}

pub fn theorem_eta(kind: EtaTheorem, actions: usize, players: usize, rounds: usize) -> f64 {
    rate(kind, actions as f64, players as f64, rounds as f64)
}

fn rate(kind: EtaTheorem, n: f64, m: f64, t: f64) -> f64 {
    let ln_n = libm::log(n);
    match kind {
        EtaTheorem::TwoPlayerOptimistic => libm::pow(ln_n / t, 1.0 / 6.0),
        EtaTheorem::BmSwap => libm::pow(n * ln_n / (m * m * t), 0.25),
        EtaTheorem::MetaSwap => libm::pow(ln_n / (n * m * m * t), 0.25),
    }
}

/// Blum–Mansour learner restarted with a halved-ish learning rate each time
/// the observed variation exhausts a doubling budget.
///
/// Each run starts from a fresh [`BmState`] with `prev_loss = 0`; the
/// variation accumulated in a run is `Σ ‖ℓ^t − ℓ^{t−1}‖∞² + Σ ‖x^t − x^{t−1}‖₁²`
/// over the run's rounds, and a run ends once it reaches the budget `B_r`.
#[derive(Debug, Clone)]
pub struct RobustBmState {
    num_actions: usize,
    run_index: usize,
    budget: f64,
    eta_r: f64,
    eta_cap: f64,
    inner: BmState,
    accumulated_variation: f64,
    prev_loss: LossVector,
    prev_x: Option<MixedStrategy>,
}

impl RobustBmState {
    pub fn new(n: usize, eta_cap: f64) -> Result<Self> {
        if !(eta_cap > 0.0) {
            return Err(Error::Parameter(format!("learning rate cap must be positive, got {eta_cap}")));
        }
        let budget = 1.0;
        let eta_r = Self::run_eta(n, budget, eta_cap);
        Ok(RobustBmState {
            num_actions: n,
            run_index: 1,
            budget,
            eta_r,
            eta_cap,
            inner: BmState::new(n, eta_r)?,
            accumulated_variation: 0.0,
            prev_loss: LossVector::zeros(n),
            prev_x: None,
        })
    }

    fn run_eta(n: usize, budget: f64, cap: f64) -> f64 {
        let nf = n as f64;
        libm::sqrt(nf * libm::log(nf) / budget).min(cap)
    }

    pub fn strategy(&self) -> &MixedStrategy {
        self.inner.strategy()
    }

    pub fn run_index(&self) -> usize {
        self.run_index
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn eta(&self) -> f64 {
        self.eta_r
    }

    pub fn eta_cap(&self) -> f64 {
        self.eta_cap
    }

    pub fn accumulated_variation(&self) -> f64 {
        self.accumulated_variation
    }

    pub fn inner(&self) -> &BmState {
        &self.inner
    }

    /// Observes this round's loss and returns next round's strategy.
    pub fn step(&mut self, loss: &LossVector) -> Result<MixedStrategy> {
        let x = self.inner.strategy().clone();
        let dl = loss.linf_distance(&self.prev_loss);
        let dx = self.prev_x.as_ref().map_or(0.0, |p| x.l1_distance(p));
        self.accumulated_variation += dl * dl + dx * dx;
        self.inner.step(loss)?;
        self.prev_loss = loss.clone();
        self.prev_x = Some(x);
        if self.accumulated_variation >= self.budget {
            self.budget *= 2.0;
            self.run_index += 1;
            self.eta_r = Self::run_eta(self.num_actions, self.budget, self.eta_cap);
            self.inner = BmState::new(self.num_actions, self.eta_r)?;
            self.accumulated_variation = 0.0;
            self.prev_loss = LossVector::zeros(self.num_actions);
            self.prev_x = None;
        }
        Ok(self.inner.strategy().clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lv(v: &[f64]) -> LossVector {
        LossVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn init_uniform_and_custom() {
        let h = HedgeState::new(3, 0.1, HedgeVariant::Vanilla, None).unwrap();
        assert_eq!(h.strategy().probs(), &[1.0 / 3.0; 3]);
        assert_eq!(h.prev_loss().values(), &[0.0; 3]);
        let init = MixedStrategy::new(vec![0.4, 0.6]).unwrap();
        let h = HedgeState::new(2, 0.1, HedgeVariant::Vanilla, Some(init)).unwrap();
        assert_eq!(h.strategy().probs(), &[0.4, 0.6]);
    }

    #[test]
    fn init_errors() {
        assert!(HedgeState::new(2, 0.0, HedgeVariant::Vanilla, None).is_err());
        assert!(HedgeState::new(2, -1.0, HedgeVariant::Optimistic, None).is_err());
        assert!(MixedStrategy::new(vec![0.5, 0.6]).is_err());
        let init = MixedStrategy::uniform(3);
        assert!(matches!(
            HedgeState::new(2, 1.0, HedgeVariant::Vanilla, Some(init)),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn constant_loss_leaves_vanilla_unchanged() {
        let init = MixedStrategy::new(vec![0.2, 0.3, 0.5]).unwrap();
        let mut h = HedgeState::new(3, 0.7, HedgeVariant::Vanilla, Some(init.clone())).unwrap();
        h.step(&lv(&[0.3, 0.3, 0.3])).unwrap();
        for (a, b) in h.strategy().probs().iter().zip(init.probs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn vanilla_step_matches_formula() {
        let init = MixedStrategy::new(vec![0.4, 0.6]).unwrap();
        let mut h = HedgeState::new(2, 1.0, HedgeVariant::Vanilla, Some(init)).unwrap();
        h.step(&lv(&[0.0, 1.0])).unwrap();
        let e = (-1.0f64).exp();
        let z = 0.4 + 0.6 * e;
        let want = [0.4 / z, 0.6 * e / z];
        for (a, b) in h.strategy().probs().iter().zip(want) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn optimistic_with_repeated_loss_equals_vanilla() {
        let mut opt = HedgeState::new(3, 0.5, HedgeVariant::Optimistic, None).unwrap();
        let l0 = lv(&[0.1, 0.9, 0.4]);
        opt.step(&l0).unwrap();
        let start = opt.strategy().clone();
        let mut van2 = HedgeState::new(3, 0.5, HedgeVariant::Vanilla, Some(start)).unwrap();
        opt.step(&l0).unwrap();
        van2.step(&l0).unwrap();
        for (a, b) in opt.strategy().probs().iter().zip(van2.strategy().probs()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn out_of_range_loss_is_contract_error() {
        assert!(matches!(LossVector::new(vec![0.5, 1.5]), Err(Error::Contract(_))));
        let mut h = HedgeState::new(2, 1.0, HedgeVariant::Vanilla, None).unwrap();
        assert!(h.step(&lv(&[0.5, 0.5, 0.5])).is_err());
    }

    #[test]
    fn large_cumulative_losses_do_not_overflow() {
        let mut h = HedgeState::new(2, 50.0, HedgeVariant::Optimistic, None).unwrap();
        for _ in 0..10_000 {
            h.step(&lv(&[0.0, 1.0])).unwrap();
        }
        assert_eq!(h.strategy().probs(), &[1.0, 0.0]);
        assert!(h.strategy().probs().iter().all(|p| p.is_finite()));
    }

    #[test]
    fn theorem_rates() {
        let e = core::f64::consts::E;
        assert!((rate(EtaTheorem::TwoPlayerOptimistic, e, 2.0, 1.0) - 1.0).abs() < 1e-15);
        let want = (2.0 * 2f64.ln() / 16384.0).powf(0.25);
        assert!((theorem_eta(EtaTheorem::BmSwap, 2, 2, 4096) - want).abs() < 1e-15);
        let want = (5f64.ln() / (5.0 * 9.0 * 1000.0)).powf(0.25);
        assert!((theorem_eta(EtaTheorem::MetaSwap, 5, 3, 1000) - want).abs() < 1e-15);
        for k in [EtaTheorem::TwoPlayerOptimistic, EtaTheorem::BmSwap, EtaTheorem::MetaSwap] {
            assert_eq!(EtaTheorem::from_name(k.name()), Some(k));
        }
    }

    #[test]
    fn wrapper_starts_with_unit_budget() {
        let w = RobustBmState::new(3, 0.05).unwrap();
        assert_eq!(w.budget(), 1.0);
        assert_eq!(w.run_index(), 1);
        assert_eq!(w.eta(), 0.05);
        assert_eq!(w.strategy().probs(), &[1.0 / 3.0; 3]);
    }

    #[test]
    fn wrapper_doubles_budget_and_restarts() {
        let mut w = RobustBmState::new(3, 0.1).unwrap();
        // ‖ℓ¹ − 0‖∞² = 1 reaches the unit budget in the first round.
        let next = w.step(&lv(&[1.0, 0.0, 0.0])).unwrap();
        assert_eq!(w.budget(), 2.0);
        assert_eq!(w.run_index(), 2);
        assert_eq!(w.accumulated_variation(), 0.0);
        assert_eq!(next.probs(), &[1.0 / 3.0; 3]);
        let want = (3.0 * 3f64.ln() / 2.0).sqrt().min(0.1);
        assert_eq!(w.eta(), want);
    }

    #[test]
    fn wrapper_constant_losses_accumulate_first_round_only() {
        let mut w = RobustBmState::new(2, 0.1).unwrap();
        let l = lv(&[0.3, 0.3]);
        for _ in 0..3 {
            w.step(&l).unwrap();
        }
        // Constant losses keep every inner learner, hence x, at uniform.
        assert!((w.accumulated_variation() - 0.09).abs() < 1e-15);
        assert_eq!(w.run_index(), 1);
    }

    proptest! {
        #[test]
        fn shift_invariance(
            losses in proptest::collection::vec(proptest::collection::vec(0.0f64..0.5, 4), 1..20),
            c in 0.0f64..0.5,
            eta in 0.01f64..2.0,
        ) {
            for variant in [HedgeVariant::Vanilla, HedgeVariant::Optimistic] {
                let mut a = HedgeState::new(4, eta, variant, None).unwrap();
                let mut b = HedgeState::new(4, eta, variant, None).unwrap();
                for l in &losses {
                    a.step(&lv(l)).unwrap();
                    let shifted: Vec<f64> = l.iter().map(|v| v + c).collect();
                    b.step(&lv(&shifted)).unwrap();
                    for (p, q) in a.strategy().probs().iter().zip(b.strategy().probs()) {
                        prop_assert!((p - q).abs() < 1e-12);
                    }
                }
            }
        }

        #[test]
        fn strategies_stay_on_simplex(
            losses in proptest::collection::vec(proptest::collection::vec(0.0f64..=1.0, 5), 1..50),
            eta in 0.001f64..10.0,
        ) {
            let mut h = HedgeState::new(5, eta, HedgeVariant::Optimistic, None).unwrap();
            for l in &losses {
                h.step(&lv(l)).unwrap();
                let s: f64 = h.strategy().probs().iter().sum();
                prop_assert!((s - 1.0).abs() <= 1e-12);
                prop_assert!(h.strategy().probs().iter().all(|p| *p >= 0.0));
            }
        }
    }
}
