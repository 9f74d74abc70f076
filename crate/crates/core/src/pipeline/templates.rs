//! Prompt templates. The files live under `templates/` with the version in
//! their name; [`TEMPLATE_VERSION`] is recorded in every provider tag.

pub const TEMPLATE_VERSION: &str = "v1";

pub const SUMMARIZE: &str = include_str!("../../templates/summarize_v1.txt");
pub const ANALYSIS: &str = include_str!("../../templates/analysis_v1.txt");

/// Substituted for an empty context summary.
pub const NO_CONTEXT: &str = "(no additional context)";

/// Replaces `{name}` placeholders. Values are inserted verbatim and are not
/// themselves scanned for placeholders.
pub fn render(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) => {
                let name = &after[..close];
                match values.iter().find(|(k, _)| *k == name) {
                    Some((_, v)) => out.push_str(v),
                    None => {
                        out.push('{');
                        out.push_str(name);
                        out.push('}');
                    }
                }
                rest = &after[close + 1..];
            }
            None => {
                out.push_str(&rest[open..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}
