use std::collections::HashMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

/// Static red / blue / swing state partition (2024 edition). States missing
/// from the table, such as DC, have no leaning.
const TABLE: &str = include_str!("../../data/leaning_v2024.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Leaning {
    Red,
    Blue,
    Swing,
}

impl Leaning {
    pub fn as_str(self) -> &'static str {
        match self {
            Leaning::Red => "Red",
            Leaning::Blue => "Blue",
            Leaning::Swing => "Swing",
        }
    }
}

fn table() -> &'static HashMap<String, Leaning> {
    static TABLE_MAP: OnceLock<HashMap<String, Leaning>> = OnceLock::new();
    TABLE_MAP.get_or_init(|| {
        let mut reader = csv::Reader::from_reader(TABLE.as_bytes());
        reader
            .records()
            .map(|r| {
                let r = r.expect("bundled leaning table is valid CSV");
                let leaning = match &r[1] {
                    "red" => Leaning::Red,
                    "blue" => Leaning::Blue,
                    "swing" => Leaning::Swing,
                    other => panic!("unknown leaning {other:?} in bundled table"),
                };
                (r[0].to_string(), leaning)
            })
            .collect()
    })
}

/// Leaning of a state by USPS code.
pub fn leaning_of(state_code: &str) -> Option<Leaning> {
    table().get(state_code).copied()
}
