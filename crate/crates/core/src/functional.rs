//! Hidden-variable and experimental-level functionals.
//!
//! Per hidden-variable value the CH functional reads
//!
//! ```text
//! S  = x(y - y') + x'(y + y') - x' - y
//! S' = x(y - y') + x'(y + y') - x'u - v y
//! ```
//!
//! with `x = p_r¹(a)`, `x' = p_r¹(a')`, `y = p_q²(b)`, `y' = p_q²(b')`,
//! `u = p_r²(a')` and `v = p_q¹(b)`. The experimental functionals average the
//! factorized joint probabilities over an [`Ensemble`].

use crate::model::{Ensemble, Outcome, OutcomeSelector, Setting, SettingPair, SinglesAssignment};

/// Detection probability `α = p₊ + p₋ = 1 - p₀` of one slot.
pub fn alpha(assign: &SinglesAssignment, setting: Setting) -> f64 {
    let s = assign.get(setting);
    s.p_plus + s.p_minus
}

struct Reads {
    x: f64,
    x_prime: f64,
    y: f64,
    y_prime: f64,
    u: f64,
    v: f64,
}

fn reads(assign: &SinglesAssignment, sel: OutcomeSelector) -> Reads {
    let r = sel.r_outcome();
    let q = sel.q_outcome();
    Reads {
        x: assign.prob(Setting::S1_A, r),
        x_prime: assign.prob(Setting::S1_APRIME, r),
        y: assign.prob(Setting::S2_B, q),
        y_prime: assign.prob(Setting::S2_BPRIME, q),
        u: assign.prob(Setting::S2_APRIME, r),
        v: assign.prob(Setting::S1_B, q),
    }
}

/// Classic CH functional at one hidden-variable value.
pub fn eval_s_hv(assign: &SinglesAssignment, sel: OutcomeSelector) -> f64 {
    let Reads { x, x_prime, y, y_prime, .. } = reads(assign, sel);
    x * (y - y_prime) + x_prime * (y + y_prime) - x_prime - y
}

/// Extended functional at one hidden-variable value. Not bounded above by zero.
pub fn eval_sprime_hv(assign: &SinglesAssignment, sel: OutcomeSelector) -> f64 {
    let Reads { x, x_prime, y, y_prime, u, v } = reads(assign, sel);
    x * (y - y_prime) + x_prime * (y + y_prime) - x_prime * u - v * y
}

/// Joint probability under Bell factorizability: `p¹(o1) · p²(o2)`.
pub fn joint_prob_factorized(
    assign: &SinglesAssignment,
    pair: SettingPair,
    o1: Outcome,
    o2: Outcome,
) -> f64 {
    assign.prob(pair.s1(), o1) * assign.prob(pair.s2(), o2)
}

/// Ensemble-averaged joint probability `P¹²_{o1 o2}` for a pair.
pub fn ensemble_joint(ens: &Ensemble, pair: SettingPair, o1: Outcome, o2: Outcome) -> f64 {
    ens.members()
        .iter()
        .map(|(w, a)| w * joint_prob_factorized(a, pair, o1, o2))
        .sum()
}

/// Ensemble-averaged single-side probability at one slot.
pub fn ensemble_single(ens: &Ensemble, setting: Setting, outcome: Outcome) -> f64 {
    ens.members().iter().map(|(w, a)| w * a.prob(setting, outcome)).sum()
}

/// Double-detection measure `M(x̂₁, x̂₂) = ∫ α¹ α² ρ`.
pub fn ensemble_m(ens: &Ensemble, pair: SettingPair) -> f64 {
    ens.members()
        .iter()
        .map(|(w, a)| w * alpha(a, pair.s1()) * alpha(a, pair.s2()))
        .sum()
}

/// Experimental extended functional assembled from the six averaged joint
/// probabilities; the fifth and sixth terms use `(r, r)` and `(q, q)`.
pub fn ensemble_sprime_exp(ens: &Ensemble, sel: OutcomeSelector) -> f64 {
    let r = sel.r_outcome();
    let q = sel.q_outcome();
    let [ab, abp, apb, apbp, apap, bb] = SettingPair::AUDITED;
    let p = |pair, o1, o2| ensemble_joint(ens, pair, o1, o2);
    p(ab, r, q) - p(abp, r, q) + p(apb, r, q) + p(apbp, r, q) - p(apap, r, r) - p(bb, q, q)
}

/// Experimental classic CH functional: four joint terms minus two singles.
pub fn ensemble_s_exp(ens: &Ensemble, sel: OutcomeSelector) -> f64 {
    let r = sel.r_outcome();
    let q = sel.q_outcome();
    let [ab, abp, apb, apbp, _, _] = SettingPair::AUDITED;
    let p = |pair, o1, o2| ensemble_joint(ens, pair, o1, o2);
    p(ab, r, q) - p(abp, r, q) + p(apb, r, q) + p(apbp, r, q)
        - ensemble_single(ens, Setting::S1_APRIME, r)
        - ensemble_single(ens, Setting::S2_B, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Ensemble, SinglesAssignment};

    const PP: OutcomeSelector = OutcomeSelector::ALL[0];

    /// Assignment with `(x, x', y, y', u, v)` placed on the `+` outcome.
    fn plus_assign(x: f64, xp: f64, y: f64, yp: f64, u: f64, v: f64) -> SinglesAssignment {
        // Setting::ALL order: 1@a, 1@a', 1@b, 2@b, 2@b', 2@a'
        SinglesAssignment::new([(x, 0.0), (xp, 0.0), (v, 0.0), (y, 0.0), (yp, 0.0), (u, 0.0)])
            .unwrap()
    }

    #[test]
    fn alpha_examples() {
        let a = SinglesAssignment::silent().with(Setting::S1_A, 0.3, 0.4).unwrap();
        assert!((alpha(&a, Setting::S1_A) - 0.7).abs() < 1e-15);
        assert!((alpha(&a, Setting::S1_A) - (1.0 - a.prob(Setting::S1_A, Outcome::NoDetect))).abs() < 1e-15);
        let a = a.with(Setting::S2_B, 1.0, 0.0).unwrap();
        assert_eq!(alpha(&a, Setting::S2_B), 1.0);
        assert_eq!(alpha(&a, Setting::S2_BPRIME), 0.0);
    }

    #[test]
    fn s_hv_examples() {
        assert_eq!(eval_s_hv(&plus_assign(0.0, 0.0, 0.0, 0.0, 0.0, 0.0), PP), 0.0);
        for yp in [0.0, 0.37, 1.0] {
            assert_eq!(eval_s_hv(&plus_assign(0.0, 0.0, 1.0, yp, 0.0, 0.0), PP), -1.0);
        }
        assert_eq!(eval_s_hv(&plus_assign(1.0, 1.0, 1.0, 1.0, 0.0, 0.0), PP), 0.0);
    }

    #[test]
    fn sprime_hv_examples() {
        assert_eq!(eval_sprime_hv(&plus_assign(0.0, 0.0, 0.0, 0.0, 0.0, 0.0), PP), 0.0);
        assert_eq!(eval_sprime_hv(&plus_assign(1.0, 1.0, 1.0, 1.0, 1.0, 1.0), PP), 0.0);
        // x=1, y=1, y'=0, x'=1, u=0, v=0: 1·1 + 1·1 - 0 - 0
        assert_eq!(eval_sprime_hv(&plus_assign(1.0, 1.0, 1.0, 0.0, 0.0, 0.0), PP), 2.0);
    }

    #[test]
    fn selector_reads_the_right_outcomes() {
        // All mass on `-`: only the (-,-) selector sees detections.
        let a = SinglesAssignment::new([(0.0, 1.0); 6]).unwrap();
        let mm = OutcomeSelector::new(-1, -1).unwrap();
        assert_eq!(eval_s_hv(&a, mm), 0.0);
        assert_eq!(eval_s_hv(&a, PP), 0.0);
        let pm = OutcomeSelector::new(1, -1).unwrap();
        // x = x' = 0, y = 1 → -1
        assert_eq!(eval_s_hv(&a, pm), -1.0);
    }

    #[test]
    fn joint_prob_examples() {
        let both = SinglesAssignment::new([(1.0, 0.0); 6]).unwrap();
        let ab = SettingPair::AUDITED[0];
        assert_eq!(joint_prob_factorized(&both, ab, Outcome::Plus, Outcome::Plus), 1.0);

        let a = SinglesAssignment::silent().with(Setting::S1_A, 0.5, 0.5).unwrap();
        assert_eq!(joint_prob_factorized(&a, ab, Outcome::Plus, Outcome::NoDetect), 0.5);

        let a = SinglesAssignment::silent()
            .with(Setting::S1_A, 0.6, 0.2)
            .unwrap()
            .with(Setting::S2_B, 0.3, 0.3)
            .unwrap();
        let p = joint_prob_factorized(&a, ab, Outcome::Minus, Outcome::NoDetect);
        assert!((p - 0.08).abs() < 1e-15);
    }

    #[test]
    fn m_examples() {
        let full = SinglesAssignment::new([(0.5, 0.5); 6]).unwrap();
        let ens = Ensemble::point_mass(full);
        for pair in SettingPair::AUDITED {
            assert_eq!(ensemble_m(&ens, pair), 1.0);
        }
        let dead_a = full.with(Setting::S1_A, 0.0, 0.0).unwrap();
        assert_eq!(ensemble_m(&Ensemble::point_mass(dead_a), SettingPair::AUDITED[0]), 0.0);

        let half = full.with(Setting::S1_A, 0.25, 0.25).unwrap();
        let mix = Ensemble::new(vec![(0.5, full), (0.5, half)]).unwrap();
        assert!((ensemble_m(&mix, SettingPair::AUDITED[0]) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn sprime_exp_examples() {
        let zero = Ensemble::point_mass(SinglesAssignment::silent());
        assert_eq!(ensemble_sprime_exp(&zero, PP), 0.0);
        let witness = Ensemble::point_mass(plus_assign(1.0, 1.0, 1.0, 0.0, 0.0, 0.0));
        assert_eq!(ensemble_sprime_exp(&witness, PP), 2.0);
    }

    #[test]
    fn s_exp_examples() {
        let zero = SinglesAssignment::silent();
        let low = plus_assign(0.0, 0.0, 1.0, 0.0, 0.0, 0.0);
        assert_eq!(ensemble_s_exp(&Ensemble::point_mass(zero), PP), 0.0);
        assert_eq!(ensemble_s_exp(&Ensemble::point_mass(low), PP), -1.0);
        let mix = Ensemble::new(vec![(0.5, zero), (0.5, low)]).unwrap();
        assert_eq!(ensemble_s_exp(&mix, PP), -0.5);
    }

    #[test]
    fn nine_joint_probabilities_sum_to_one() {
        let a = SinglesAssignment::new([(0.1, 0.2), (0.3, 0.3), (0.0, 1.0), (0.5, 0.1), (0.0, 0.0), (0.9, 0.05)])
            .unwrap();
        for pair in SettingPair::AUDITED {
            let total: f64 = Outcome::ALL
                .iter()
                .flat_map(|&o1| Outcome::ALL.iter().map(move |&o2| (o1, o2)))
                .map(|(o1, o2)| joint_prob_factorized(&a, pair, o1, o2))
                .sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
