use bartlett_core::{Error, Result};

/// Parses `start:stop:step` (inclusive of `stop` up to rounding) or a comma list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::validation("empty grid"));
    }
    let values = if text.contains(':') {
        let parts: Vec<f64> = text.split(':').map(parse_number).collect::<Result<_>>()?;
        let [start, stop, step] = parts[..] else {
            return Err(Error::validation(format!("range grid needs start:stop:step, got {text:?}")));
        };
        if step <= 0.0 || stop < start {
            return Err(Error::validation(format!("range grid needs step > 0 and stop >= start, got {text:?}")));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count > 1_000_000 {
            return Err(Error::validation("range grid has more than 10^6 points"));
        }
        (0..count).map(|k| start + k as f64 * step).collect()
    } else {
        text.split(',').map(parse_number).collect::<Result<Vec<_>>>()?
    };
    Ok(values)
}

fn parse_number(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| Error::validation(format!("not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::validation(format!("not finite: {s:?}")));
    }
    Ok(v)
}

/// `s0:mass` pair for a complementary-series atom.
pub fn parse_pair(text: &str) -> Result<(f64, f64)> {
    match text.split_once(':') {
        Some((a, b)) => Ok((parse_number(a)?, parse_number(b)?)),
        None => Err(Error::validation(format!("expected s0:mass, got {text:?}"))),
    }
}
