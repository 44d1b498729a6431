//! Finite normal-form games with dense loss tensors.
//!
//! Every player has the same number of actions `n`. A pure profile
//! `(s_0, …, s_{m-1})` is stored at the row-major index
//! `Σ_k s_k · n^(m-1-k)`, so for two players `losses(0)` is the row player's
//! matrix `A[s_0][s_1]` and `losses(1)` is `B[s_0][s_1]`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::strategy::{LossVector, MixedStrategy};

/// Largest loss tensor (entries per player) the crate will allocate.
pub const MAX_TENSOR_ENTRIES: usize = 10_000_000;

/// Largest number of pure profiles searched when computing a social optimum.
pub const MAX_EXHAUSTIVE_PROFILES: usize = 1_000_000;

/// The units a game's losses are stored in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// Losses in `[0, 1]`; learners consume them unchanged.
    Unit,
    /// Losses in `[-1, 1]`; learners see `(v + 1) / 2`.
    Raw,
}

impl Scale {
    pub fn to_unit(self, v: f64) -> f64 {
        match self {
            Scale::Unit => v,
            Scale::Raw => (v + 1.0) / 2.0,
        }
    }

    pub fn to_native(self, u: f64) -> f64 {
        match self {
            Scale::Unit => u,
            Scale::Raw => 2.0 * u - 1.0,
        }
    }

    /// Width of the native loss range. Regrets, which are differences of
    /// losses, convert from unit to native units by this factor.
    pub fn span(self) -> f64 {
        match self {
            Scale::Unit => 1.0,
            Scale::Raw => 2.0,
        }
    }

    fn range(self) -> (f64, f64) {
        match self {
            Scale::Unit => (0.0, 1.0),
            Scale::Raw => (-1.0, 1.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scale::Unit => "unit",
            Scale::Raw => "raw",
        }
    }

    pub fn from_name(name: &str) -> Option<Scale> {
        match name {
            "unit" => Some(Scale::Unit),
            "raw" => Some(Scale::Raw),
            _ => None,
        }
    }
}

/// An `m`-player game with `n` actions per player.
#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    num_players: usize,
    num_actions: usize,
    losses: Vec<Vec<f64>>,
    scale: Scale,
}

fn tensor_len(m: usize, n: usize) -> Option<usize> {
    n.checked_pow(u32::try_from(m).ok()?)
}

impl Game {
    pub fn new(num_players: usize, num_actions: usize, losses: Vec<Vec<f64>>, scale: Scale) -> Result<Self> {
        if num_players == 0 || num_actions == 0 {
            return Err(Error::Parameter("a game needs at least one player and one action".into()));
        }
        let entries = tensor_len(num_players, num_actions).unwrap_or(usize::MAX);
        if entries > MAX_TENSOR_ENTRIES {
            return Err(Error::Capacity {
                what: "loss tensor",
                size: entries,
                limit: MAX_TENSOR_ENTRIES,
            });
        }
        if losses.len() != num_players {
            return Err(Error::Dimension {
                what: "loss tensors per player",
                expected: num_players,
                found: losses.len(),
            });
        }
        let (lo, hi) = scale.range();
        for tensor in &losses {
            if tensor.len() != entries {
                return Err(Error::Dimension {
                    what: "loss tensor entries",
                    expected: entries,
                    found: tensor.len(),
                });
            }
            if let Some(v) = tensor.iter().find(|v| !(**v >= lo && **v <= hi)) {
                return Err(Error::Parameter(format!(
                    "loss {v} outside [{lo}, {hi}] for {} scale",
                    scale.name()
                )));
            }
        }
        Ok(Game {
            num_players,
            num_actions,
            losses,
            scale,
        })
    }

    /// Two-player game from row-major `n × n` matrices `A` (row player) and `B`.
    pub fn bimatrix(a: &[Vec<f64>], b: &[Vec<f64>], scale: Scale) -> Result<Self> {
        let n = a.len();
        let flatten = |m: &[Vec<f64>]| -> Result<Vec<f64>> {
            if m.len() != n {
                return Err(Error::Dimension {
                    what: "matrix rows",
                    expected: n,
                    found: m.len(),
                });
            }
            let mut out = Vec::with_capacity(n * n);
            for row in m {
                if row.len() != n {
                    return Err(Error::Dimension {
                        what: "matrix columns",
                        expected: n,
                        found: row.len(),
                    });
                }
                out.extend_from_slice(row);
            }
            Ok(out)
        };
        Game::new(2, n, vec![flatten(a)?, flatten(b)?], scale)
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    /// Player `player`'s loss tensor in stored units.
    pub fn losses(&self, player: usize) -> &[f64] {
        &self.losses[player]
    }

    pub fn profile_index(&self, profile: &[usize]) -> usize {
        profile.iter().fold(0, |acc, &s| acc * self.num_actions + s)
    }

    /// Inverse of [`Game::profile_index`].
    pub fn profile_at(&self, mut index: usize) -> Vec<usize> {
        let mut profile = vec![0; self.num_players];
        for slot in profile.iter_mut().rev() {
            *slot = index % self.num_actions;
            index /= self.num_actions;
        }
        profile
    }

    /// Loss of `player` at a pure profile, in stored units.
    pub fn entry(&self, player: usize, profile: &[usize]) -> f64 {
        self.losses[player][self.profile_index(profile)]
    }

    fn check_profile(&self, player: usize, profile: &[MixedStrategy]) -> Result<()> {
        if player >= self.num_players {
            return Err(Error::Dimension {
                what: "player index",
                expected: self.num_players,
                found: player,
            });
        }
        if profile.len() != self.num_players {
            return Err(Error::Dimension {
                what: "strategy profile",
                expected: self.num_players,
                found: profile.len(),
            });
        }
        if let Some(x) = profile.iter().find(|x| x.len() != self.num_actions) {
            return Err(Error::Dimension {
                what: "strategy length",
                expected: self.num_actions,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Expected loss of each pure action of `player` against the product of
    /// the other players' strategies, in stored units.
    pub fn native_loss_vector(&self, player: usize, profile: &[MixedStrategy]) -> Result<Vec<f64>> {
        self.check_profile(player, profile)?;
        let n = self.num_actions;
        let m = self.num_players;
        let mut data = self.losses[player].clone();
        // Contract opponent axes from the last one down, so lower axes keep
        // their positions.
        for axis in (0..m).rev().filter(|&k| k != player) {
            let inner = if player > axis { n } else { 1 };
            let outer = n.pow(axis as u32);
            let probs = profile[axis].probs();
            let mut next = vec![0.0; outer * inner];
            for o in 0..outer {
                for (s, &p) in probs.iter().enumerate() {
                    let base = (o * n + s) * inner;
                    for r in 0..inner {
                        next[o * inner + r] += p * data[base + r];
                    }
                }
            }
            data = next;
        }
        debug_assert_eq!(data.len(), n);
        Ok(data)
    }

    /// Expected loss vector of `player`, mapped to `[0, 1]`.
    pub fn expected_loss_vector(&self, player: usize, profile: &[MixedStrategy]) -> Result<LossVector> {
        let native = self.native_loss_vector(player, profile)?;
        LossVector::new(native.into_iter().map(|v| self.scale.to_unit(v)).collect())
    }

    /// Per-player expected loss `⟨x_i, ℓ_i⟩` in `[0, 1]` units.
    pub fn realized_loss(&self, profile: &[MixedStrategy]) -> Result<Vec<f64>> {
        (0..self.num_players)
            .map(|i| {
                let loss = self.expected_loss_vector(i, profile)?;
                Ok(profile[i].dot(loss.values()))
            })
            .collect()
    }

    /// Per-player expected loss in stored units.
    pub fn native_realized_loss(&self, profile: &[MixedStrategy]) -> Result<Vec<f64>> {
        (0..self.num_players)
            .map(|i| Ok(profile[i].dot(&self.native_loss_vector(i, profile)?)))
            .collect()
    }

    /// Sum of all players' stored-unit losses at a pure profile.
    pub fn social_cost_pure(&self, profile: &[usize]) -> f64 {
        let idx = self.profile_index(profile);
        self.losses.iter().map(|t| t[idx]).sum()
    }
}

/// The three 2×2 games used for the vanilla-Hedge lower bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CanonicalGame {
    /// Matching Pennies `(A, B₁)`, zero-sum.
    MatchingPennies,
    /// `(A, B₂)` with the column player's loss constant.
    Invariant,
    /// `(A, A)`, a cooperation game.
    Cooperation,
}

impl CanonicalGame {
    pub fn name(self) -> &'static str {
        match self {
            CanonicalGame::MatchingPennies => "matching_pennies_G1",
            CanonicalGame::Invariant => "invariant_G2",
            CanonicalGame::Cooperation => "cooperation_G3",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [CanonicalGame::MatchingPennies, CanonicalGame::Invariant, CanonicalGame::Cooperation]
            .into_iter()
            .find(|g| g.name() == name)
    }
}

/// Builds one of the canonical games, stored in raw `[-1, 1]` units.
pub fn canonical_game(which: CanonicalGame) -> Game {
    let a = [vec![1.0, -1.0], vec![-1.0, 1.0]];
    let b = match which {
        CanonicalGame::MatchingPennies => [vec![-1.0, 1.0], vec![1.0, -1.0]],
        CanonicalGame::Invariant => [vec![1.0, 1.0], vec![1.0, 1.0]],
        CanonicalGame::Cooperation => a.clone(),
    };
    Game::bimatrix(&a, &b, Scale::Raw).expect("canonical games are well formed")
}

/// i.i.d. uniform `[0, 1)` losses, deterministic in `seed`.
pub fn random_game(num_players: usize, num_actions: usize, seed: u64) -> Result<Game> {
    if num_players < 2 || num_actions < 2 {
        return Err(Error::Parameter("random games need m ≥ 2 and n ≥ 2".into()));
    }
    let entries = tensor_len(num_players, num_actions)
        .filter(|&e| e <= MAX_TENSOR_ENTRIES)
        .ok_or(Error::Capacity {
            what: "loss tensor",
            size: usize::MAX,
            limit: MAX_TENSOR_ENTRIES,
        })?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let losses = (0..num_players)
        .map(|_| (0..entries).map(|_| rng.random::<f64>()).collect())
        .collect();
    Game::new(num_players, num_actions, losses, Scale::Unit)
}

/// A `(λ, μ)`-smooth cost-minimization game together with its social optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothGameSpec {
    pub lambda: f64,
    pub mu: f64,
    pub game: Game,
    /// A pure profile minimizing the social cost.
    pub optimal_profile: Vec<usize>,
    /// Social cost of `optimal_profile`, in the game's units.
    pub opt: f64,
}

impl SmoothGameSpec {
    /// `λ·L(x*) + μ·L(x) − Σ_i L_i(x*_i, x_{-i})` at pure profiles; nonnegative
    /// when the smoothness inequality holds.
    pub fn smoothness_slack(&self, profile: &[usize], deviation: &[usize]) -> f64 {
        let mut deviating: Vec<usize> = profile.to_vec();
        let mut unilateral = 0.0;
        for i in 0..profile.len() {
            deviating[i] = deviation[i];
            unilateral += self.game.entry(i, &deviating);
            deviating[i] = profile[i];
        }
        self.lambda * self.game.social_cost_pure(deviation) + self.mu * self.game.social_cost_pure(profile)
            - unilateral
    }

    /// Smallest smoothness slack over `samples` seeded random profile pairs.
    pub fn spot_check(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let m = self.game.num_players();
        let n = self.game.num_actions();
        let mut worst = f64::INFINITY;
        for _ in 0..samples {
            let x: Vec<usize> = (0..m).map(|_| rng.random_range(0..n)).collect();
            let x_star: Vec<usize> = (0..m).map(|_| rng.random_range(0..n)).collect();
            worst = worst.min(self.smoothness_slack(&x, &x_star));
        }
        worst
    }
}

/// Load-balancing game: every player picks one resource, and a resource with
/// load `k` costs each of its users `a·k + b`. Costs are divided by the
/// largest attainable cost so losses lie in `[0, 1]`.
///
/// With `a, b ≥ 0` such games are `(5/3, 1/3)`-smooth.
pub fn congestion_game(num_players: usize, coefficients: &[(f64, f64)]) -> Result<SmoothGameSpec> {
    if num_players < 2 {
        return Err(Error::Parameter("congestion games need at least two players".into()));
    }
    let n = coefficients.len();
    if n == 0 {
        return Err(Error::Parameter("congestion games need at least one resource".into()));
    }
    if coefficients.iter().any(|&(a, b)| !(a >= 0.0 && b >= 0.0) || a + b <= 0.0) {
        return Err(Error::Parameter("resource costs must be nonnegative and nonzero".into()));
    }
    let profiles = tensor_len(num_players, n).unwrap_or(usize::MAX);
    if profiles > MAX_EXHAUSTIVE_PROFILES {
        return Err(Error::Capacity {
            what: "exhaustive social-optimum search",
            size: profiles,
            limit: MAX_EXHAUSTIVE_PROFILES,
        });
    }
    let max_cost = coefficients
        .iter()
        .map(|&(a, b)| a * num_players as f64 + b)
        .fold(0.0, f64::max);

    let mut losses = vec![vec![0.0; profiles]; num_players];
    let mut load = vec![0usize; n];
    let mut best = (f64::INFINITY, 0usize);
    for idx in 0..profiles {
        let profile = decode(idx, num_players, n);
        load.iter_mut().for_each(|l| *l = 0);
        profile.iter().for_each(|&r| load[r] += 1);
        let mut social = 0.0;
        for (i, &r) in profile.iter().enumerate() {
            let (a, b) = coefficients[r];
            let cost = (a * load[r] as f64 + b) / max_cost;
            losses[i][idx] = cost;
            social += cost;
        }
        if social < best.0 {
            best = (social, idx);
        }
    }
    let game = Game::new(num_players, n, losses, Scale::Unit)?;
    Ok(SmoothGameSpec {
        lambda: 5.0 / 3.0,
        mu: 1.0 / 3.0,
        optimal_profile: decode(best.1, num_players, n),
        opt: best.0,
        game,
    })
}

/// Congestion game with seeded random affine costs `a ∈ [0.5, 1.5)`, `b ∈ [0, 1)`.
pub fn smooth_congestion_game(num_players: usize, resources: usize, seed: u64) -> Result<SmoothGameSpec> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let coefficients: Vec<(f64, f64)> = (0..resources)
        .map(|_| (0.5 + rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    congestion_game(num_players, &coefficients)
}

fn decode(mut idx: usize, m: usize, n: usize) -> Vec<usize> {
    let mut profile = vec![0; m];
    for slot in profile.iter_mut().rev() {
        *slot = idx % n;
        idx /= n;
    }
    profile
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::brute_force_loss_vector;
    use proptest::prelude::*;

    fn strat(p: &[f64]) -> MixedStrategy {
        MixedStrategy::new(p.to_vec()).unwrap()
    }

    #[test]
    fn matching_pennies_uniform_opponent() {
        let g = canonical_game(CanonicalGame::MatchingPennies);
        let profile = [strat(&[0.5, 0.5]), strat(&[0.5, 0.5])];
        assert_eq!(g.native_loss_vector(0, &profile).unwrap(), vec![0.0, 0.0]);
        assert_eq!(g.expected_loss_vector(0, &profile).unwrap().values(), &[0.5, 0.5]);
        assert_eq!(g.realized_loss(&profile).unwrap(), vec![0.5, 0.5]);
        assert_eq!(g.native_realized_loss(&profile).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn matching_pennies_pure_opponent() {
        let g = canonical_game(CanonicalGame::MatchingPennies);
        let profile = [strat(&[0.5, 0.5]), strat(&[1.0, 0.0])];
        assert_eq!(g.native_loss_vector(0, &profile).unwrap(), vec![1.0, -1.0]);
        assert_eq!(g.expected_loss_vector(0, &profile).unwrap().values(), &[1.0, 0.0]);
    }

    #[test]
    fn canonical_matrices() {
        let g1 = canonical_game(CanonicalGame::MatchingPennies);
        assert_eq!(g1.losses(0), &[1.0, -1.0, -1.0, 1.0]);
        assert_eq!(g1.losses(1), &[-1.0, 1.0, 1.0, -1.0]);
        assert_eq!(g1.scale(), Scale::Raw);
        let g2 = canonical_game(CanonicalGame::Invariant);
        assert_eq!(g2.losses(1), &[1.0; 4]);
        let g3 = canonical_game(CanonicalGame::Cooperation);
        assert_eq!(g3.losses(1), g3.losses(0));
        for g in [CanonicalGame::MatchingPennies, CanonicalGame::Invariant, CanonicalGame::Cooperation] {
            assert_eq!(CanonicalGame::from_name(g.name()), Some(g));
        }
    }

    #[test]
    fn invariant_game_column_player_always_loses_one() {
        let g = canonical_game(CanonicalGame::Invariant);
        for x1 in [0.0, 0.3, 0.9] {
            let profile = [strat(&[x1, 1.0 - x1]), strat(&[0.4, 0.6])];
            assert_eq!(g.native_realized_loss(&profile).unwrap()[1], 1.0);
        }
    }

    #[test]
    fn pure_profile_is_tensor_entry() {
        let g = random_game(2, 2, 3).unwrap();
        for s0 in 0..2 {
            for s1 in 0..2 {
                let profile = [MixedStrategy::pure(2, s0), MixedStrategy::pure(2, s1)];
                let r = g.realized_loss(&profile).unwrap();
                assert_eq!(r[0], g.entry(0, &[s0, s1]));
                assert_eq!(r[1], g.entry(1, &[s0, s1]));
            }
        }
    }

    #[test]
    fn three_player_uniform_matches_enumeration() {
        let g = random_game(3, 3, 11).unwrap();
        let profile = vec![MixedStrategy::uniform(3); 3];
        for player in 0..3 {
            let got = g.native_loss_vector(player, &profile).unwrap();
            let want = brute_force_loss_vector(&g, player, &profile);
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn random_game_shape_and_determinism() {
        assert_eq!(random_game(2, 2, 7).unwrap(), random_game(2, 2, 7).unwrap());
        assert_ne!(random_game(2, 2, 7).unwrap(), random_game(2, 2, 8).unwrap());
        let g = random_game(3, 4, 1).unwrap();
        let total: usize = (0..3).map(|i| g.losses(i).len()).sum();
        assert_eq!(total, 3 * 64);
        assert!((0..3).all(|i| g.losses(i).iter().all(|v| (0.0..=1.0).contains(v))));
        assert!(random_game(1, 2, 0).is_err());
    }

    #[test]
    fn dimension_errors() {
        let g = random_game(3, 2, 0).unwrap();
        let short = vec![MixedStrategy::uniform(2); 2];
        assert!(matches!(g.expected_loss_vector(0, &short), Err(Error::Dimension { .. })));
        let wrong_len = vec![MixedStrategy::uniform(3); 3];
        assert!(matches!(g.expected_loss_vector(0, &wrong_len), Err(Error::Dimension { .. })));
        assert!(Game::new(2, 2, vec![vec![0.0; 4]], Scale::Unit).is_err());
        assert!(Game::new(2, 2, vec![vec![0.0; 4], vec![2.0; 4]], Scale::Unit).is_err());
        assert!(matches!(
            Game::new(8, 10, vec![], Scale::Unit),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn identical_resources_split_players() {
        let spec = congestion_game(2, &[(1.0, 0.0), (1.0, 0.0)]).unwrap();
        assert_ne!(spec.optimal_profile[0], spec.optimal_profile[1]);
        assert_eq!((spec.lambda, spec.mu), (5.0 / 3.0, 1.0 / 3.0));
        assert!((spec.opt - 1.0).abs() < 1e-15);
    }

    #[test]
    fn congestion_games_pass_smoothness_spot_check() {
        for seed in 0..5 {
            let spec = smooth_congestion_game(3, 3, seed).unwrap();
            assert!(spec.spot_check(1000, seed) >= -1e-12);
        }
        let spec = smooth_congestion_game(2, 4, 9).unwrap();
        assert!(spec.spot_check(1000, 1) >= -1e-12);
    }

    #[test]
    fn congestion_capacity_error() {
        assert!(matches!(
            smooth_congestion_game(7, 8, 0),
            Err(Error::Capacity { .. })
        ));
    }

    fn arb_strategy(n: usize) -> impl Strategy<Value = MixedStrategy> {
        proptest::collection::vec(0.01f64..1.0, n).prop_map(|w| {
            let s: f64 = w.iter().sum();
            MixedStrategy::from_normalized(w.into_iter().map(|v| v / s).collect())
        })
    }

    proptest! {
        #[test]
        fn loss_vector_is_linear_in_opponent_marginals(
            seed in 0u64..1000,
            mix in 0.0f64..1.0,
            x0 in arb_strategy(3),
            ya in arb_strategy(3),
            yb in arb_strategy(3),
            z in arb_strategy(3),
        ) {
            let g = random_game(3, 3, seed).unwrap();
            let mixed: Vec<f64> = ya.probs().iter().zip(yb.probs()).map(|(a, b)| mix * a + (1.0 - mix) * b).collect();
            let ym = MixedStrategy::from_normalized(mixed);
            let la = g.native_loss_vector(0, &[x0.clone(), ya, z.clone()]).unwrap();
            let lb = g.native_loss_vector(0, &[x0.clone(), yb, z.clone()]).unwrap();
            let lm = g.native_loss_vector(0, &[x0, ym, z]).unwrap();
            for j in 0..3 {
                prop_assert!((lm[j] - (mix * la[j] + (1.0 - mix) * lb[j])).abs() < 1e-12);
            }
        }

        #[test]
        fn pure_opponents_give_exact_lookup(seed in 0u64..1000, s in proptest::collection::vec(0usize..3, 3), player in 0usize..3) {
            let g = random_game(3, 3, seed).unwrap();
            let profile: Vec<MixedStrategy> = s.iter().map(|&a| MixedStrategy::pure(3, a)).collect();
            let l = g.native_loss_vector(player, &profile).unwrap();
            for j in 0..3 {
                let mut p = s.clone();
                p[player] = j;
                prop_assert_eq!(l[j], g.entry(player, &p));
            }
        }
    }
}
