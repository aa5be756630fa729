//! Order-stable compensated summation.

/// Neumaier's variant of Kahan summation. Used for every reduction whose
/// result must not depend on how the terms were produced, so the parallel
/// and sequential element loops agree bitwise.
pub(crate) fn neumaier_sum<I>(values: I) -> f64
where
    I: IntoIterator<Item = f64>,
{
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        // No compensation once a term or the total is infinite; the
        // difference of infinities would poison the sum with NaN.
        if t.is_finite() {
            if sum.abs() >= v.abs() {
                comp += (sum - t) + v;
            } else {
                comp += (v - t) + sum;
            }
        }
        sum = t;
    }
    sum + comp
}
