use std::str::FromStr;
use std::sync::LazyLock;

use chrono::NaiveDate;
use regex::Regex;

use super::{DomainEvalFn, FnKind};
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Validator {
    Date,
    IsoTimestamp,
    Url,
    Email,
    Ipv4,
    Uuid,
    CreditCard,
    UpcA,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidatorFnParams {
    pub validator: Validator,
}

static NUMERIC_DATE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(\d{1,4})([/.\-])(\d{1,2})[/.\-](\d{1,4})$").unwrap());
static ISO_TIMESTAMP: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(\d{4})-(\d{2})-(\d{2})[T ](\d{2}):(\d{2})(?::(\d{2})(?:\.\d{1,9})?)?(?:Z|[+\-]\d{2}:?\d{2})?$")
        .unwrap()
});
static URL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)^(?:https?|ftp)://[a-z0-9](?:[a-z0-9\-]*[a-z0-9])?(?:\.[a-z0-9](?:[a-z0-9\-]*[a-z0-9])?)+(?::\d{1,5})?(?:[/?#]\S*)?$",
    )
    .unwrap()
});
static EMAIL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^[A-Za-z0-9._%+\-]+@[A-Za-z0-9](?:[A-Za-z0-9\-]*[A-Za-z0-9])?(?:\.[A-Za-z0-9\-]+)*\.[A-Za-z]{2,}$")
        .unwrap()
});
static UUID: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)^[0-9a-f]{8}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{12}$").unwrap());

impl Validator {
    pub const ALL: [Validator; 8] = [
        Validator::Date,
        Validator::IsoTimestamp,
        Validator::Url,
        Validator::Email,
        Validator::Ipv4,
        Validator::Uuid,
        Validator::CreditCard,
        Validator::UpcA,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Validator::Date => "date",
            Validator::IsoTimestamp => "iso_timestamp",
            Validator::Url => "url",
            Validator::Email => "email",
            Validator::Ipv4 => "ipv4",
            Validator::Uuid => "uuid",
            Validator::CreditCard => "credit_card",
            Validator::UpcA => "upc_a",
        }
    }

    /// Validates the whitespace-trimmed value.
    pub fn accepts(self, raw: &str) -> bool {
        let v = raw.trim();
        match self {
            Validator::Date => valid_numeric_date(v),
            Validator::IsoTimestamp => valid_iso_timestamp(v),
            Validator::Url => URL.is_match(v),
            Validator::Email => EMAIL.is_match(v),
            Validator::Ipv4 => valid_ipv4(v),
            Validator::Uuid => UUID.is_match(v),
            Validator::CreditCard => valid_credit_card(v),
            Validator::UpcA => valid_upc_a(v),
        }
    }

    pub fn into_fn(self) -> DomainEvalFn {
        DomainEvalFn::new(
            format!("fun:{}", self.name()),
            FnKind::Validator(ValidatorFnParams { validator: self }),
        )
    }
}

impl FromStr for Validator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Validator::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::UnknownValidator(s.to_string()))
    }
}

pub fn builtin_validators() -> Vec<DomainEvalFn> {
    Validator::ALL.into_iter().map(Validator::into_fn).collect()
}

fn ymd_ok(y: i32, m: u32, d: u32) -> bool {
    NaiveDate::from_ymd_opt(y, m, d).is_some()
}

fn expand_year(s: &str) -> Option<i32> {
    let y: i32 = s.parse().ok()?;
    match s.len() {
        2 => Some(2000 + y),
        4 => Some(y),
        _ => None,
    }
}

// y-m-d when the first field has four digits, otherwise m/d/y or d/m/y.
fn valid_numeric_date(v: &str) -> bool {
    let Some(caps) = NUMERIC_DATE.captures(v) else {
        return false;
    };
    let (a, mid, c) = (&caps[1], &caps[3], &caps[4]);
    let Ok(b) = mid.parse::<u32>() else { return false };
    if a.len() == 4 {
        let (Ok(y), Ok(d)) = (a.parse::<i32>(), c.parse::<u32>()) else {
            return false;
        };
        return c.len() <= 2 && ymd_ok(y, b, d);
    }
    if a.len() > 2 {
        return false;
    }
    let (Ok(first), Some(y)) = (a.parse::<u32>(), expand_year(c)) else {
        return false;
    };
    ymd_ok(y, first, b) || ymd_ok(y, b, first)
}

fn valid_iso_timestamp(v: &str) -> bool {
    let Some(caps) = ISO_TIMESTAMP.captures(v) else {
        return false;
    };
    let num = |i: usize| caps.get(i).map_or(Some(0), |m| m.as_str().parse::<u32>().ok());
    let (Some(y), Some(mo), Some(d), Some(h), Some(mi), Some(s)) = (num(1), num(2), num(3), num(4), num(5), num(6))
    else {
        return false;
    };
    ymd_ok(y as i32, mo, d) && h < 24 && mi < 60 && s < 61
}

fn valid_ipv4(v: &str) -> bool {
    let parts: Vec<&str> = v.split('.').collect();
    parts.len() == 4
        && parts.iter().all(|p| {
            !p.is_empty()
                && p.len() <= 3
                && p.bytes().all(|b| b.is_ascii_digit())
                && p.parse::<u16>().is_ok_and(|n| n <= 255)
        })
}

fn digits_of(v: &str, separators: &[char]) -> Option<Vec<u32>> {
    v.chars()
        .filter(|c| !separators.contains(c))
        .map(|c| c.to_digit(10))
        .collect()
}

fn luhn_ok(digits: &[u32]) -> bool {
    let sum: u32 = digits
        .iter()
        .rev()
        .enumerate()
        .map(|(i, &d)| {
            if i % 2 == 1 {
                let x = d * 2;
                if x > 9 {
                    x - 9
                } else {
                    x
                }
            } else {
                d
            }
        })
        .sum();
    sum.is_multiple_of(10)
}

fn valid_credit_card(v: &str) -> bool {
    match digits_of(v, &[' ', '-']) {
        Some(d) if (13..=19).contains(&d.len()) => luhn_ok(&d),
        _ => false,
    }
}

fn valid_upc_a(v: &str) -> bool {
    match digits_of(v, &[]) {
        Some(d) if d.len() == 12 => {
            let odd: u32 = d[..11].iter().step_by(2).sum();
            let even: u32 = d[1..11].iter().step_by(2).sum();
            (10 - (3 * odd + even) % 10) % 10 == d[11]
        }
        _ => false,
    }
}
