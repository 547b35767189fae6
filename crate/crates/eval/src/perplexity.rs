//! Token-weighted perplexity over externally produced log-probabilities.

use crate::output::ModelOutputRecord;
use crate::EvalError;

/// Pooled negative log-likelihood in nats and the number of tokens behind it.
pub fn total_nll(outputs: &[ModelOutputRecord]) -> Result<(f64, usize), EvalError> {
    let mut nll = 0.0;
    let mut n = 0;
    for r in outputs {
        let lp = r.logprobs.as_ref().ok_or_else(|| EvalError::Record {
            id: r.id.clone(),
            message: "record carries no logprobs".into(),
        })?;
        let k = r.logprob_base.to_nats();
        nll -= lp.iter().map(|t| t.logprob * k).sum::<f64>();
        n += lp.len();
    }
    Ok((nll, n))
}

/// `exp` of the mean per-token NLL over all records pooled together.
pub fn perplexity(outputs: &[ModelOutputRecord]) -> Result<f64, EvalError> {
    let (nll, n) = total_nll(outputs)?;
    if n == 0 {
        return Err(EvalError::Input("no tokens to score".into()));
    }
    Ok((nll / n as f64).exp())
}
