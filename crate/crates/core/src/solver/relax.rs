use super::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct RelaxParams {
    /// Grid resolution: relaxed weights are scaled so the bound maps to `x`.
    pub x: u32,
}

impl Default for RelaxParams {
    fn default() -> Self {
        Self { x: 10 }
    }
}

/// `ceil(x * raw / bound)` for real-valued costs.
pub fn relax_weight(raw: f64, bound: f64, x: u32) -> Result<u64, SolverError> {
    if bound.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(SolverError::ZeroBound);
    }
    Ok((x as f64 * raw / bound).ceil() as u64)
}

/// `ceil(x * num / den)` in exact integer arithmetic.
pub fn relax_ratio(num: u128, den: u128, x: u32) -> Result<u64, SolverError> {
    if den == 0 {
        return Err(SolverError::ZeroBound);
    }
    let v = (num * x as u128).div_ceil(den);
    Ok(u64::try_from(v).unwrap_or(u64::MAX))
}
