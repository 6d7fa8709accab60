//! Grid axes: a single value, a comma list, `lo..hi` (inclusive),
//! `lo..hi:step`, or `lo..hi:xF` for a geometric progression.

const MAX_POINTS: usize = 1_000_000;

fn parse_num(s: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| format!("'{s}' is not a number"))
        .and_then(|v| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("'{s}' is not finite"))
            }
        })
}

/// Parse one axis into its values in increasing grid order.
pub fn parse_axis(spec: &str) -> Result<Vec<f64>, String> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err("empty range".into());
    }
    if spec.contains(',') {
        return spec.split(',').map(parse_num).collect();
    }
    let Some((lo, rest)) = spec.split_once("..") else {
        return Ok(vec![parse_num(spec)?]);
    };
    let (hi, step) = match rest.split_once(':') {
        Some((hi, step)) => (hi, Some(step.trim())),
        None => (rest, None),
    };
    let (lo, hi) = (parse_num(lo)?, parse_num(hi)?);
    if hi < lo {
        return Err(format!("empty range {spec}"));
    }
    let slack = 1e-9 * hi.abs().max(1.0);
    let mut out = Vec::new();
    match step {
        Some(s) if s.starts_with('x') => {
            let factor = parse_num(&s[1..])?;
            if !(factor > 1.0) || !(lo > 0.0) {
                return Err(format!("geometric range {spec} needs lo > 0 and factor > 1"));
            }
            let mut v = lo;
            while v <= hi + slack {
                out.push(v);
                v *= factor;
                if out.len() > MAX_POINTS {
                    return Err(format!("range {spec} has too many points"));
                }
            }
        }
        s => {
            let step = s.map(parse_num).transpose()?.unwrap_or(1.0);
            if !(step > 0.0) {
                return Err(format!("step must be > 0 in {spec}"));
            }
            let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
            if count > MAX_POINTS {
                return Err(format!("range {spec} has too many points"));
            }
            out.extend((0..count).map(|i| lo + i as f64 * step));
        }
    }
    Ok(out)
}

/// An axis of non-negative integers.
pub fn parse_int_axis(spec: &str) -> Result<Vec<u64>, String> {
    parse_axis(spec)?
        .into_iter()
        .map(|v| {
            if v >= 0.0 && v.fract() == 0.0 && v < 2f64.powi(53) {
                Ok(v as u64)
            } else {
                Err(format!("'{v}' is not a non-negative integer in '{spec}'"))
            }
        })
        .collect()
}

/// Comma-separated 0-based coordinates, or `all`.
pub fn parse_coords(spec: &str, n: usize) -> Result<Vec<usize>, String> {
    let spec = spec.trim();
    if spec == "all" {
        return Ok((0..n).collect());
    }
    if spec.is_empty() || spec == "none" {
        return Ok(Vec::new());
    }
    spec.split(',')
        .map(|c| {
            c.trim()
                .parse::<usize>()
                .map_err(|_| format!("'{c}' is not a coordinate"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axes() {
        assert_eq!(parse_axis("4").unwrap(), vec![4.0]);
        assert_eq!(parse_axis("2,3.5").unwrap(), vec![2.0, 3.5]);
        assert_eq!(parse_int_axis("4..10:2").unwrap(), vec![4, 6, 8, 10]);
        assert_eq!(parse_int_axis("64..4096:x4").unwrap(), vec![64, 256, 1024, 4096]);
        assert_eq!(parse_axis("0.5..1.5:0.25").unwrap().len(), 5);
        assert!(parse_axis("5..4").is_err());
        assert!(parse_axis("").is_err());
        assert!(parse_int_axis("1.5").is_err());
    }

    #[test]
    fn coords() {
        assert_eq!(parse_coords("all", 3).unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_coords("0, 2", 3).unwrap(), vec![0, 2]);
        assert!(parse_coords("x", 3).is_err());
    }
}
