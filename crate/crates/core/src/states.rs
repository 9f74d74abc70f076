//! US state normalization: name, USPS code and canonical display name.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UsState {
    pub name: &'static str,
    pub code: &'static str,
}

/// The 50 states plus the District of Columbia, sorted by name.
pub const US_STATES: [UsState; 51] = [
    UsState { name: "Alabama", code: "AL" },
    UsState { name: "Alaska", code: "AK" },
    UsState { name: "Arizona", code: "AZ" },
    UsState { name: "Arkansas", code: "AR" },
    UsState { name: "California", code: "CA" },
    UsState { name: "Colorado", code: "CO" },
    UsState { name: "Connecticut", code: "CT" },
    UsState { name: "Delaware", code: "DE" },
    UsState { name: "District of Columbia", code: "DC" },
    UsState { name: "Florida", code: "FL" },
    UsState { name: "Georgia", code: "GA" },
    UsState { name: "Hawaii", code: "HI" },
    UsState { name: "Idaho", code: "ID" },
    UsState { name: "Illinois", code: "IL" },
    UsState { name: "Indiana", code: "IN" },
    UsState { name: "Iowa", code: "IA" },
    UsState { name: "Kansas", code: "KS" },
    UsState { name: "Kentucky", code: "KY" },
    UsState { name: "Louisiana", code: "LA" },
    UsState { name: "Maine", code: "ME" },
    UsState { name: "Maryland", code: "MD" },
    UsState { name: "Massachusetts", code: "MA" },
    UsState { name: "Michigan", code: "MI" },
    UsState { name: "Minnesota", code: "MN" },
    UsState { name: "Mississippi", code: "MS" },
    UsState { name: "Missouri", code: "MO" },
    UsState { name: "Montana", code: "MT" },
    UsState { name: "Nebraska", code: "NE" },
    UsState { name: "Nevada", code: "NV" },
    UsState { name: "New Hampshire", code: "NH" },
    UsState { name: "New Jersey", code: "NJ" },
    UsState { name: "New Mexico", code: "NM" },
    UsState { name: "New York", code: "NY" },
    UsState { name: "North Carolina", code: "NC" },
    UsState { name: "North Dakota", code: "ND" },
    UsState { name: "Ohio", code: "OH" },
    UsState { name: "Oklahoma", code: "OK" },
    UsState { name: "Oregon", code: "OR" },
    UsState { name: "Pennsylvania", code: "PA" },
    UsState { name: "Rhode Island", code: "RI" },
    UsState { name: "South Carolina", code: "SC" },
    UsState { name: "South Dakota", code: "SD" },
    UsState { name: "Tennessee", code: "TN" },
    UsState { name: "Texas", code: "TX" },
    UsState { name: "Utah", code: "UT" },
    UsState { name: "Vermont", code: "VT" },
    UsState { name: "Virginia", code: "VA" },
    UsState { name: "Washington", code: "WA" },
    UsState { name: "West Virginia", code: "WV" },
    UsState { name: "Wisconsin", code: "WI" },
    UsState { name: "Wyoming", code: "WY" },
];

/// Resolves a state name or USPS code, case-insensitively, to its table row.
///
/// Also accepts "Washington DC" / "D.C." spellings for the District.
pub fn normalize_state(text: &str) -> Option<&'static UsState> {
    let key: String = text
        .chars()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .collect::<String>()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase();
    if key.is_empty() {
        return None;
    }
    if matches!(key.as_str(), "dc" | "washington dc" | "district of columbia") {
        return US_STATES.iter().find(|s| s.code == "DC");
    }
    US_STATES
        .iter()
        .find(|s| s.name.to_lowercase() == key || s.code.to_lowercase() == key)
}

pub fn state_by_code(code: &str) -> Option<&'static UsState> {
    US_STATES.iter().find(|s| s.code.eq_ignore_ascii_case(code))
}
