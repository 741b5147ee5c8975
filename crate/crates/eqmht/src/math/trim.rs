//! Two-sided trimmed mean.

use super::TrimOrder;
use crate::error::{Error, Result};

/// Mean of `xs` after discarding `floor(beta * len)` elements from each tail.
///
/// Equals the arithmetic mean when `beta = 0`.
pub fn trimmed_mean(xs: &[f64], beta: TrimOrder) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::Domain("trimmed_mean of empty input".into()));
    }
    let n = xs.len();
    let cut = (beta.value() * n as f64).floor() as usize;
    if 2 * cut >= n {
        return Err(Error::Domain(format!(
            "trimming {cut} per tail leaves no data out of {n}"
        )));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let kept = &sorted[cut..n - cut];
    Ok(kept.iter().sum::<f64>() / kept.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Probability;
    use proptest::prelude::*;

    fn beta(b: f64) -> TrimOrder {
        TrimOrder::new(b).unwrap()
    }

    #[test]
    fn drops_one_from_each_tail() {
        let got = trimmed_mean(&[5.0, 1.0, 3.0, 2.0, 4.0], beta(0.2)).unwrap();
        assert_eq!(got, 3.0);
    }

    #[test]
    fn constant_data_any_beta() {
        for &b in &[0.0, 0.1, 0.3, 0.49] {
            let xs = vec![7.25; 11];
            assert_eq!(trimmed_mean(&xs, beta(b)).unwrap(), 7.25);
        }
    }

    #[test]
    fn beta_zero_is_plain_mean() {
        let xs = [1.5, -2.0, 0.25, 8.0];
        let got = trimmed_mean(&xs, beta(0.0)).unwrap();
        let mean = xs.iter().sum::<f64>() / 4.0;
        assert_eq!(got, mean);
    }

    #[test]
    fn empty_input_is_domain_error() {
        assert!(trimmed_mean(&[], beta(0.1)).is_err());
    }

    #[test]
    fn single_element_survives_trim() {
        assert_eq!(trimmed_mean(&[42.0], beta(0.49)).unwrap(), 42.0);
    }

    #[test]
    fn recovers_known_mean_from_gaussian_draws() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(91);
        let mu = 2.5;
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| mu + rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let got = trimmed_mean(&xs, beta(0.05)).unwrap();
        // The 5% trimmed mean of a normal has variance close to sigma^2/n;
        // 4 standard errors with a small margin for the trimming.
        let se = 1.05 / (n as f64).sqrt();
        assert!((got - mu).abs() < 4.0 * se, "got {got}, want {mu} +- {}", 4.0 * se);
        let _ = Probability::new(0.5).unwrap();
    }

    proptest! {
        #[test]
        fn translation_equivariant(
            xs in proptest::collection::vec(-1e3f64..1e3, 1..60),
            c in -1e3f64..1e3,
            b in 0.0f64..0.499,
        ) {
            let t = TrimOrder::new(b).unwrap();
            let base = trimmed_mean(&xs, t).unwrap();
            let shifted: Vec<f64> = xs.iter().map(|x| x + c).collect();
            let got = trimmed_mean(&shifted, t).unwrap();
            prop_assert!((got - (base + c)).abs() <= 1e-9 * (1.0 + base.abs() + c.abs()));
        }

        #[test]
        fn lies_between_min_and_max(
            xs in proptest::collection::vec(-1e6f64..1e6, 1..60),
            b in 0.0f64..0.499,
        ) {
            let t = TrimOrder::new(b).unwrap();
            let got = trimmed_mean(&xs, t).unwrap();
            let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(got >= lo - 1e-9 && got <= hi + 1e-9);
        }
    }
}
