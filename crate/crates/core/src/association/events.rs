use crate::error::{domain, Error, Result};
use crate::linalg::{log_sum_exp, Mat24, Vec4};

use super::{JointAssociationEvent, MeasurementFrame, PredictedMeasurement};

/// Default upper bound on the size of an exhaustively enumerated event set.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

/// Number of JAEs sharing the cardinality profile `phi` over `m`
/// measurements: `m! / Π φₙ!`.
pub fn count_events_for_cardinality(m: usize, phi: &[usize]) -> Result<u128> {
    if phi.iter().sum::<usize>() != m {
        return Err(domain(format!("cardinalities {phi:?} do not sum to {m}")));
    }
    // Product of binomials C(remaining, φₙ) keeps intermediates small.
    let mut remaining = m as u128;
    let mut total: u128 = 1;
    for &k in phi {
        let k = k as u128;
        let mut binom: u128 = 1;
        for i in 0..k {
            binom = binom
                .checked_mul(remaining - i)
                .ok_or_else(|| domain("event count overflows u128"))?
                / (i + 1);
        }
        total = total.checked_mul(binom).ok_or_else(|| domain("event count overflows u128"))?;
        remaining -= k;
    }
    Ok(total)
}

/// Every assignment of `m` measurements to `n_targets` targets or clutter,
/// in lexicographic order (first measurement most significant).
pub fn enumerate_all_events(m: usize, n_targets: usize, cap: usize) -> Result<Vec<JointAssociationEvent>> {
    if n_targets > u8::MAX as usize - 1 {
        return Err(domain(format!("at most {} targets supported", u8::MAX - 1)));
    }
    let base = n_targets + 1;
    let total = (base as f64).powi(m as i32);
    if total > cap as f64 {
        return Err(Error::Capacity { requested: total, cap });
    }
    let total = total as usize;
    let mut events = Vec::with_capacity(total);
    let mut digits = vec![0u8; m];
    for _ in 0..total {
        events.push(JointAssociationEvent::from_assignment(digits.clone(), n_targets));
        // increment the base-(n+1) counter, last measurement fastest
        for d in digits.iter_mut().rev() {
            *d += 1;
            if (*d as usize) < base {
                break;
            }
            *d = 0;
        }
    }
    Ok(events)
}

/// Per-measurement log factors of the event weight: assigning measurement
/// `j` to target `n` contributes `ln E[λₙ] + ln N(yⱼ; H·mₙ, Sₙ)`, to
/// clutter `ln(ρ·λ_c)`. An event's log weight is the sum over its
/// measurements.
#[derive(Debug, Clone)]
pub struct AssignmentScores {
    /// Row `j` holds the factors of measurement `j` for labels `0..=n`.
    table: Vec<f64>,
    n_targets: usize,
    clutter: f64,
}

impl AssignmentScores {
    pub fn new(
        frame: &MeasurementFrame,
        targets: &[PredictedMeasurement],
        rate_means: &[f64],
        clutter_intensity: f64,
    ) -> Result<Self> {
        check_rates(rate_means, targets.len())?;
        let clutter = ln_intensity(clutter_intensity);
        let ln_rates: Vec<f64> = rate_means.iter().map(|r| r.ln()).collect();
        let mut table = Vec::with_capacity(frame.len() * (targets.len() + 1));
        for y in &frame.points {
            table.push(clutter);
            table.extend(targets.iter().zip(&ln_rates).map(|(t, lr)| lr + t.logpdf(y)));
        }
        Ok(Self { table, n_targets: targets.len(), clutter })
    }

    /// Scores that ignore the spatial likelihood: only the rate and clutter
    /// factors.
    pub fn prior_only(n_measurements: usize, rate_means: &[f64], clutter_intensity: f64) -> Result<Self> {
        check_rates(rate_means, rate_means.len())?;
        let clutter = ln_intensity(clutter_intensity);
        let mut table = Vec::with_capacity(n_measurements * (rate_means.len() + 1));
        for _ in 0..n_measurements {
            table.push(clutter);
            table.extend(rate_means.iter().map(|r| r.ln()));
        }
        Ok(Self { table, n_targets: rate_means.len(), clutter })
    }

    pub fn n_targets(&self) -> usize {
        self.n_targets
    }

    /// Log factor of giving measurement `j` the label `label`.
    pub fn score(&self, j: usize, label: u8) -> f64 {
        self.table[j * (self.n_targets + 1) + label as usize]
    }

    /// Factors of measurement `j` for labels `0..=n`.
    pub fn row(&self, j: usize) -> &[f64] {
        let w = self.n_targets + 1;
        &self.table[j * w..(j + 1) * w]
    }

    pub fn clutter(&self) -> f64 {
        self.clutter
    }

    pub fn event_score(&self, assignment: &[u8]) -> f64 {
        self.table
            .chunks_exact(self.n_targets + 1)
            .zip(assignment)
            .map(|(row, &a)| row[a as usize])
            .sum()
    }

    /// Sets `log_weight` of every event and normalizes.
    pub fn weigh(&self, events: &mut [JointAssociationEvent]) -> Result<()> {
        for e in events.iter_mut() {
            e.log_weight = self.event_score(&e.assignment);
        }
        normalize_weights(events)
    }
}

fn ln_intensity(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else {
        f64::NEG_INFINITY
    }
}

fn check_rates(rate_means: &[f64], n: usize) -> Result<()> {
    if rate_means.len() != n {
        return Err(domain(format!("{} rate means for {n} targets", rate_means.len())));
    }
    if let Some(r) = rate_means.iter().find(|r| !(**r > 0.0)) {
        return Err(domain(format!("measurement rate mean {r} must be positive")));
    }
    Ok(())
}

/// Unnormalized log posterior weight of one event:
/// `φ⁰·ln(ρ·λ_c) + Σₙ [φⁿ·ln E[λₙ] + Σ_{j→n} ln N(yⱼ; H·mₙ, Sₙ)]`.
///
/// `targets` holds `(m, S)` per target.
pub fn event_log_weight(
    event: &JointAssociationEvent,
    frame: &MeasurementFrame,
    targets: &[(Vec4, crate::linalg::Mat2)],
    rate_means: &[f64],
    rho: f64,
    lambda_c: f64,
    h: &Mat24,
) -> Result<f64> {
    check_rates(rate_means, targets.len())?;
    let mut total = event.count(0) as f64 * ln_intensity(rho * lambda_c);
    for (n, ((mean, innovation), rate)) in targets.iter().zip(rate_means).enumerate() {
        let label = n + 1;
        total += event.count(label) as f64 * rate.ln();
        let center = h * mean;
        for j in event.members(label) {
            total += crate::linalg::gaussian_logpdf(&frame.points[j], &center, innovation)?;
        }
    }
    Ok(total)
}

/// Softmax over `log_weight` into `normalized_weight`.
pub fn normalize_weights(events: &mut [JointAssociationEvent]) -> Result<()> {
    let lse = log_sum_exp(events.iter().map(|e| e.log_weight));
    if !lse.is_finite() {
        return Err(domain("every association event has zero weight"));
    }
    for e in events.iter_mut() {
        e.normalized_weight = (e.log_weight - lse).exp();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{position_matrix, Mat2, Vec2};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// All cardinality profiles of `m` over `parts` labels.
    fn compositions(m: usize, parts: usize) -> Vec<Vec<usize>> {
        if parts == 1 {
            return vec![vec![m]];
        }
        (0..=m)
            .flat_map(|k| {
                compositions(m - k, parts - 1).into_iter().map(move |mut rest| {
                    rest.insert(0, k);
                    rest
                })
            })
            .collect()
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_events_for_cardinality(7, &[1, 3, 3]).unwrap(), 140);
        assert_eq!(count_events_for_cardinality(9, &[9]).unwrap(), 1);
        let total: u128 = compositions(3, 3)
            .iter()
            .map(|phi| count_events_for_cardinality(3, phi).unwrap())
            .sum();
        assert_eq!(total, 27);
        assert!(count_events_for_cardinality(3, &[1, 1]).is_err());
    }

    #[test]
    fn enumeration_examples() {
        let e = enumerate_all_events(0, 2, 10).unwrap();
        assert_eq!(e.len(), 1);
        assert!(e[0].assignment.is_empty());

        let e = enumerate_all_events(2, 1, 10).unwrap();
        let a: Vec<Vec<u8>> = e.iter().map(|e| e.assignment.clone()).collect();
        assert_eq!(a, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);

        assert_eq!(enumerate_all_events(3, 2, 1000).unwrap().len(), 27);
        assert!(matches!(enumerate_all_events(20, 3, 1000), Err(Error::Capacity { .. })));
    }

    #[test]
    fn enumeration_matches_counting_oracle() {
        for m in 0..=6 {
            for n in 0..=3 {
                let events = enumerate_all_events(m, n, DEFAULT_ENUMERATION_CAP).unwrap();
                assert_eq!(events.len(), (n + 1).pow(m as u32));
                // tally profiles and compare to the multinomial count
                let mut tally = std::collections::HashMap::new();
                for e in &events {
                    assert_eq!(e.cardinalities.iter().sum::<usize>(), m);
                    *tally.entry(e.cardinalities.clone()).or_insert(0u128) += 1;
                }
                let mut sum = 0;
                for phi in compositions(m, n + 1) {
                    let c = count_events_for_cardinality(m, &phi).unwrap();
                    assert_eq!(tally.get(&phi).copied().unwrap_or(0), c);
                    sum += c;
                }
                assert_eq!(sum, events.len() as u128);
            }
        }
    }

    #[test]
    fn single_event_normalizes_to_one() {
        let mut e = vec![JointAssociationEvent::from_assignment(vec![1, 0], 1)];
        e[0].log_weight = -1234.5;
        normalize_weights(&mut e).unwrap();
        assert_eq!(e[0].normalized_weight, 1.0);
    }

    #[test]
    fn all_zero_weights_is_an_error() {
        let mut e = vec![JointAssociationEvent::from_assignment(vec![0], 1)];
        e[0].log_weight = f64::NEG_INFINITY;
        assert!(normalize_weights(&mut e).is_err());
    }

    #[test]
    fn weight_ratio_matches_likelihood_ratio() {
        // one target, one measurement: target vs clutter
        let h = position_matrix();
        let frame = MeasurementFrame::new(vec![Vec2::new(1.0, 2.0)]);
        let s = Mat2::new(4.0, 1.0, 1.0, 3.0);
        let targets = [(Vec4::new(0.0, 0.5, 3.0, 3.0), s)];
        let (rate, rho, lc) = (7.0, 0.01, 3.0);
        let to_target = JointAssociationEvent::from_assignment(vec![1], 1);
        let to_clutter = JointAssociationEvent::from_assignment(vec![0], 1);
        let lt = event_log_weight(&to_target, &frame, &targets, &[rate], rho, lc, &h).unwrap();
        let lcl = event_log_weight(&to_clutter, &frame, &targets, &[rate], rho, lc, &h).unwrap();
        // hand-evaluated density
        let d = Vec2::new(1.0, 1.5);
        let maha = d.dot(&(s.try_inverse().unwrap() * d));
        let pdf = (-0.5 * maha).exp() / (2.0 * std::f64::consts::PI * s.determinant().sqrt());
        assert_relative_eq!((lt - lcl).exp(), rate * pdf / (rho * lc), max_relative = 1e-12);
    }

    #[test]
    fn table_scores_agree_with_direct_weight() {
        let h = position_matrix();
        let frame = MeasurementFrame::new(vec![Vec2::new(1.0, 2.0), Vec2::new(-3.0, 0.5), Vec2::new(10.0, 9.0)]);
        let targets = [
            (Vec4::new(0.0, 0.0, 1.0, 1.0), Mat2::new(4.0, 1.0, 1.0, 3.0)),
            (Vec4::new(8.0, 8.0, 0.0, 0.0), Mat2::new(2.0, 0.0, 0.0, 5.0)),
        ];
        let rates = [5.0, 12.0];
        let preds: Vec<PredictedMeasurement> = targets
            .iter()
            .map(|(m, s)| PredictedMeasurement::from_parts(h * m, *s).unwrap())
            .collect();
        let scores = AssignmentScores::new(&frame, &preds, &rates, 0.02 * 4.0).unwrap();
        for e in enumerate_all_events(3, 2, 100).unwrap() {
            let direct = event_log_weight(&e, &frame, &targets, &rates, 0.02, 4.0, &h).unwrap();
            assert_relative_eq!(scores.event_score(&e.assignment), direct, max_relative = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn weights_normalized_and_shift_invariant(
            logs in proptest::collection::vec(-800.0f64..50.0, 1..60),
            shift in -1e3f64..1e3,
        ) {
            let mut a: Vec<JointAssociationEvent> = logs.iter().map(|&l| {
                let mut e = JointAssociationEvent::from_assignment(vec![], 0);
                e.log_weight = l;
                e
            }).collect();
            let mut b = a.clone();
            for e in b.iter_mut() { e.log_weight += shift; }
            normalize_weights(&mut a).unwrap();
            normalize_weights(&mut b).unwrap();
            let sum: f64 = a.iter().map(|e| e.normalized_weight).sum();
            prop_assert!((sum - 1.0).abs() <= 1e-10);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!(x.normalized_weight >= 0.0 && x.normalized_weight <= 1.0);
                prop_assert!((x.normalized_weight - y.normalized_weight).abs() <= 1e-12);
            }
        }
    }
}
