use crate::error::{invalid, Error, Result};
use crate::model::WorkloadSpec;

/// Erlang-C probability that an arrival waits, for `cores` servers and
/// `erlangs` of offered traffic.
///
/// Evaluated through the Erlang-B recursion, which stays finite for
/// thousands of servers.
pub fn erlang_c(cores: u32, erlangs: f64) -> Result<f64> {
    if cores == 0 {
        return Err(invalid("cores must be >= 1"));
    }
    if !(erlangs >= 0.0) {
        return Err(invalid(format!(
            "offered traffic must be >= 0, got {erlangs}"
        )));
    }
    let c = f64::from(cores);
    if erlangs >= c {
        return Err(Error::Unstable { rho: erlangs / c });
    }
    if erlangs == 0.0 {
        return Ok(0.0);
    }
    let mut b = 1.0;
    for k in 1..=cores {
        b = erlangs * b / (f64::from(k) + erlangs * b);
    }
    let rho = erlangs / c;
    Ok(b / (1.0 - rho * (1.0 - b)))
}

/// `P(T > t)` for the FCFS M/M/C sojourn time.
///
/// `T = W + S` where `W` is zero with probability `1 - P_wait` and otherwise
/// `Exp(C mu - lambda)`, and `S ~ Exp(mu)` is independent.
pub fn mmc_sojourn_tail(cores: u32, lambda: f64, mu: f64, t: f64) -> Result<f64> {
    if !(mu > 0.0) || !(lambda >= 0.0) {
        return Err(invalid("rates must satisfy lambda >= 0 and mu > 0"));
    }
    if !(t >= 0.0) {
        return Err(invalid(format!("t must be >= 0, got {t}")));
    }
    let p_wait = erlang_c(cores, lambda / mu)?;
    let gamma = f64::from(cores) * mu - lambda;
    let service = (-mu * t).exp();
    let diff = gamma - mu;
    // Survival of Exp(gamma) + Exp(mu); the equal-rate case is Erlang-2.
    let hypo = if diff.abs() <= 1e-9 * mu {
        (1.0 + mu * t) * service
    } else {
        (gamma * service - mu * (-gamma * t).exp()) / diff
    };
    Ok(((1.0 - p_wait) * service + p_wait * hypo).clamp(0.0, 1.0))
}

/// `P(T > t)` with unlimited cores: the batch only waits for the slowest
/// of its own jobs, `1 - E[(1 - exp(-mu t))^B]`. Lower bound for every
/// finite pool.
pub fn infinite_server_exceedance(w: &WorkloadSpec, t: f64) -> f64 {
    let done = -(-w.service_rate() * t).exp_m1();
    (1.0 - w.batch_law().pgf(done)).clamp(0.0, 1.0)
}

/// Mean sojourn time in the M/M/1 processor-sharing queue, `1 / (mu - lambda)`.
pub fn ps_mean_sojourn(lambda: f64, mu: f64) -> Result<f64> {
    if !(mu > 0.0) || !(lambda >= 0.0) {
        return Err(invalid("rates must satisfy lambda >= 0 and mu > 0"));
    }
    if lambda >= mu {
        return Err(Error::Unstable { rho: lambda / mu });
    }
    Ok(1.0 / (mu - lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::batch_sojourn_tail;
    use crate::model::BatchLaw;

    #[test]
    fn infinite_server_bound() {
        let one = WorkloadSpec::new(1.0, BatchLaw::deterministic(1).unwrap(), 2.0).unwrap();
        assert!((infinite_server_exceedance(&one, 1.5) - (-3.0f64).exp()).abs() < 1e-15);
        let two = WorkloadSpec::new(1.0, BatchLaw::deterministic(2).unwrap(), 1.0).unwrap();
        let p = (-1.0f64).exp();
        assert!(
            (infinite_server_exceedance(&two, 1.0) - (1.0 - (1.0 - p) * (1.0 - p))).abs() < 1e-15
        );
        let geo = WorkloadSpec::new(1.0, BatchLaw::geometric(0.5).unwrap(), 1.0).unwrap();
        let bound = infinite_server_exceedance(&geo, 2.0);
        let mut prev = 1.0;
        for c in [3, 5, 10, 40] {
            let s = batch_sojourn_tail(&geo, c, &[2.0]).unwrap().survival[0];
            assert!(s >= bound - 1e-9 && s <= prev + 1e-12);
            prev = s;
        }
        assert!((prev - bound).abs() < 1e-6, "{prev} vs {bound}");
    }

    fn erlang_c_by_sum(c: u32, a: f64) -> f64 {
        // Textbook form with explicit factorials.
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 0..c {
            if k > 0 {
                term *= a / f64::from(k);
            }
            sum += term;
        }
        let top = term * a / f64::from(c) * f64::from(c) / (f64::from(c) - a);
        top / (sum + top)
    }

    #[test]
    fn erlang_c_examples() {
        assert!((erlang_c(1, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((erlang_c(2, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(erlang_c(2, 1e-9).unwrap() < 1e-8);
        assert_eq!(erlang_c(2, 0.0).unwrap(), 0.0);
        assert!(matches!(erlang_c(2, 2.0), Err(Error::Unstable { .. })));
        assert!(matches!(erlang_c(3, 5.0), Err(Error::Unstable { .. })));
    }

    #[test]
    fn erlang_c_matches_factorial_sum() {
        for c in [1u32, 2, 5, 17, 40] {
            for frac in [0.1, 0.5, 0.9, 0.99] {
                let a = frac * f64::from(c);
                let r = erlang_c(c, a).unwrap();
                let e = erlang_c_by_sum(c, a);
                assert!((r - e).abs() < 1e-12 * e.max(1.0), "c={c} a={a}");
            }
        }
        // large pools stay finite
        let p = erlang_c(2000, 1900.0).unwrap();
        assert!(p > 0.0 && p < 1.0);
    }

    #[test]
    fn mm1_sojourn_is_exponential() {
        for t in [0.0, 0.3, 1.0, 4.0, 12.0] {
            let v = mmc_sojourn_tail(1, 0.6, 1.0, t).unwrap();
            assert!((v - (-0.4 * t).exp()).abs() < 1e-13);
        }
    }

    #[test]
    fn sojourn_tail_at_zero_is_one() {
        for c in [1, 2, 8] {
            assert!(
                (mmc_sojourn_tail(c, 0.5 * f64::from(c), 1.0, 0.0).unwrap() - 1.0).abs() < 1e-14
            );
        }
    }

    #[test]
    fn resonant_case_is_continuous() {
        // C mu - lambda == mu when lambda = (C - 1) mu.
        let exact = mmc_sojourn_tail(2, 1.0, 1.0, 1.5).unwrap();
        let near = mmc_sojourn_tail(2, 1.0 + 1e-6, 1.0, 1.5).unwrap();
        assert!((exact - near).abs() < 1e-5);
        // Erlang-C(2, 1) = 1/3: 2/3 e^{-t} + 1/3 (1 + t) e^{-t}
        let t: f64 = 1.5;
        let hand = (2.0 / 3.0 + (1.0 + t) / 3.0) * (-t).exp();
        assert!((exact - hand).abs() < 1e-14);
    }

    #[test]
    fn ps_mean_examples() {
        assert_eq!(ps_mean_sojourn(0.5, 1.0).unwrap(), 2.0);
        assert_eq!(ps_mean_sojourn(0.0, 2.0).unwrap(), 0.5);
        assert!((ps_mean_sojourn(0.9, 1.0).unwrap() - 10.0).abs() < 1e-12);
        assert!(matches!(
            ps_mean_sojourn(1.0, 1.0),
            Err(Error::Unstable { .. })
        ));
    }
}
