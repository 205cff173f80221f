//! Run-length strings for boolean grids: `"<count><symbol>"` runs, `.` = false, `#` = true.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RleError {
    #[error("unexpected character `{0}`")]
    BadChar(char),
    #[error("run without a count")]
    MissingCount,
    #[error("decoded {got} cells, expected {expected}")]
    Length { got: usize, expected: usize },
}

pub fn encode(grid: &[bool]) -> String {
    let mut out = String::new();
    let mut iter = grid.iter().peekable();
    while let Some(&v) = iter.next() {
        let mut n = 1usize;
        while iter.peek() == Some(&&v) {
            iter.next();
            n += 1;
        }
        out.push_str(&n.to_string());
        out.push(if v { '#' } else { '.' });
    }
    out
}

pub fn decode(text: &str, expected: usize) -> Result<Vec<bool>, RleError> {
    let mut out = Vec::with_capacity(expected);
    let mut count: Option<usize> = None;
    for ch in text.chars() {
        match ch {
            '0'..='9' => {
                let d = ch as usize - '0' as usize;
                count = Some(count.unwrap_or(0) * 10 + d);
            }
            '.' | '#' => {
                let n = count.take().ok_or(RleError::MissingCount)?;
                out.extend(std::iter::repeat_n(ch == '#', n));
            }
            other => return Err(RleError::BadChar(other)),
        }
    }
    if count.is_some() {
        return Err(RleError::MissingCount);
    }
    if out.len() != expected {
        return Err(RleError::Length { got: out.len(), expected });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_grid() {
        let g = [true, true, false, false, false, true];
        assert_eq!(encode(&g), "2#3.1#");
        assert_eq!(decode("2#3.1#", 6).unwrap(), g);
    }

    #[test]
    fn errors() {
        assert_eq!(decode("2#x", 2), Err(RleError::BadChar('x')));
        assert_eq!(decode("#", 1), Err(RleError::MissingCount));
        assert_eq!(decode("3#", 2), Err(RleError::Length { got: 3, expected: 2 }));
    }

    proptest! {
        #[test]
        fn round_trip(grid in proptest::collection::vec(any::<bool>(), 0..400)) {
            prop_assert_eq!(decode(&encode(&grid), grid.len()).unwrap(), grid);
        }
    }
}
