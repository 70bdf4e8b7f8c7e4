use num_rational::Ratio;

use crate::error::{Error, Result};

const SIG_DIGITS: usize = 17;

/// Plain decimal rendering of `num / den` with 17 significant digits,
/// rounded half-up by exact long division.
pub fn decimal_17(num: u128, den: u128) -> String {
    assert!(den > 0);
    if num == 0 {
        return "0".to_string();
    }
    let int_part = num / den;
    let mut rem = num % den;

    // first SIG_DIGITS + 1 significant digits, and the power of ten of the leading one
    let mut digits: Vec<u8> = Vec::with_capacity(SIG_DIGITS + 1);
    let mut lead_exp: i32;
    if int_part > 0 {
        let s = int_part.to_string();
        lead_exp = s.len() as i32 - 1;
        digits.extend(s.bytes().take(SIG_DIGITS + 1).map(|b| b - b'0'));
    } else {
        lead_exp = -1;
        loop {
            rem *= 10;
            if rem / den != 0 {
                break;
            }
            lead_exp -= 1;
        }
        rem /= 10;
    }
    while digits.len() < SIG_DIGITS + 1 {
        rem *= 10;
        digits.push((rem / den) as u8);
        rem %= den;
    }
    let wide = digits.iter().fold(0u128, |acc, &d| acc * 10 + d as u128);
    let mut sig = wide / 10 + u128::from(wide % 10 >= 5);
    if sig == 10u128.pow(SIG_DIGITS as u32) {
        sig /= 10;
        lead_exp += 1;
    }

    let text = sig.to_string();
    let last = SIG_DIGITS as i32 - 1;
    if lead_exp >= last {
        format!("{text}{}", "0".repeat((lead_exp - last) as usize))
    } else if lead_exp >= 0 {
        let cut = lead_exp as usize + 1;
        format!("{}.{}", &text[..cut], &text[cut..])
    } else {
        format!("0.{}{text}", "0".repeat((-lead_exp - 1) as usize))
    }
}

/// Parses `a/b` (or a bare integer) into a fraction.
pub fn parse_ratio(s: &str) -> Result<Ratio<u64>> {
    let bad = || Error::Parse(format!("expected a rational `num/den`, got `{s}`"));
    let (n, d) = match s.trim().split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: u64 = n.parse().map_err(|_| bad())?;
    let d: u64 = d.parse().map_err(|_| bad())?;
    if d == 0 {
        return Err(bad());
    }
    Ok(Ratio::new(n, d))
}
