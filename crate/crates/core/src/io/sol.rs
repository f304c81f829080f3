//! Solution files: an `=obj= <value>` line followed by `<name> <value>`
//! lines. Columns missing from a file are zero.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::IoError;
use crate::numerics::Real;

const OBJECTIVE_KEY: &str = "=obj=";

pub fn write_sol<R: Real>(names: &[String], values: &[R], objective: &R) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{OBJECTIVE_KEY} {}", objective.to_exact_string());
    for (name, value) in names.iter().zip(values) {
        let _ = writeln!(out, "{name} {}", value.to_exact_string());
    }
    out
}

/// Values in the order of `names`, plus the objective line if present.
pub fn read_sol<R: Real>(text: &str, names: &[String]) -> Result<(Vec<R>, Option<R>), IoError> {
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(j, n)| (n.as_str(), j)).collect();
    let mut values: Vec<Option<R>> = vec![None; names.len()];
    let mut objective = None;
    for (number, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, value) = line
            .rsplit_once(char::is_whitespace)
            .ok_or_else(|| IoError::parse(number, "expected '<name> <value>'"))?;
        let name = name.trim();
        let value = R::parse(value).ok_or_else(|| IoError::parse(number, format!("invalid number '{value}'")))?;
        if name == OBJECTIVE_KEY {
            objective = Some(value);
            continue;
        }
        let &j = index
            .get(name)
            .ok_or_else(|| IoError::parse(number, format!("unknown column '{name}'")))?;
        if values[j].replace(value).is_some() {
            return Err(IoError::parse(number, format!("column '{name}' listed twice")));
        }
    }
    Ok((values.into_iter().map(|v| v.unwrap_or_else(R::zero)).collect(), objective))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rational;

    fn names() -> Vec<String> {
        vec!["x1".to_string(), "x2".to_string()]
    }

    #[test]
    fn round_trip() {
        let text = write_sol(&names(), &[1.0, 0.0], &-2.0);
        assert_eq!(text, "=obj= -2\nx1 1\nx2 0\n");
        assert_eq!(read_sol::<f64>(&text, &names()).unwrap(), (vec![1.0, 0.0], Some(-2.0)));
    }

    #[test]
    fn missing_columns_are_zero() {
        let (values, obj) = read_sol::<Rational>("x2 1/3\n", &names()).unwrap();
        assert_eq!(values, vec![Rational::from_i64(0), Rational::new(1.into(), 3.into())]);
        assert_eq!(obj, None);
    }

    #[test]
    fn rejects_unknown_and_repeated_columns() {
        assert!(matches!(read_sol::<f64>("x3 1\n", &names()), Err(IoError::Parse { line: 1, .. })));
        assert!(matches!(read_sol::<f64>("x1 1\nx1 2\n", &names()), Err(IoError::Parse { line: 2, .. })));
        assert!(matches!(read_sol::<f64>("x1\n", &names()), Err(IoError::Parse { line: 1, .. })));
    }
}
