use std::sync::LazyLock;

use super::Script;

const RANGES_TSV: &str = include_str!("../../../../data/script_ranges.tsv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptRange {
    pub script: Script,
    pub start: u32,
    pub end: u32,
    pub block: String,
}

static RANGES: LazyLock<Vec<ScriptRange>> = LazyLock::new(|| {
    let mut ranges = parse_ranges(RANGES_TSV).expect("bundled script range table is valid");
    ranges.sort_by_key(|r| r.start);
    ranges
});

fn parse_ranges(src: &str) -> Result<Vec<ScriptRange>, String> {
    let mut out = Vec::new();
    for (n, line) in src.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 3 {
            return Err(format!("line {}: expected script, start, end", n + 1));
        }
        let script =
            Script::from_code(cols[0]).ok_or_else(|| format!("line {}: bad script", n + 1))?;
        let start = u32::from_str_radix(cols[1], 16).map_err(|e| format!("line {}: {e}", n + 1))?;
        let end = u32::from_str_radix(cols[2], 16).map_err(|e| format!("line {}: {e}", n + 1))?;
        out.push(ScriptRange {
            script,
            start,
            end,
            block: cols.get(3).unwrap_or(&"").to_string(),
        });
    }
    Ok(out)
}

/// The bundled range table, sorted by start codepoint.
pub fn range_table() -> &'static [ScriptRange] {
    &RANGES
}

pub(super) fn script_of(c: char) -> Option<Script> {
    let cp = c as u32;
    let ranges = range_table();
    let idx = ranges.partition_point(|r| r.start <= cp);
    if idx == 0 {
        return None;
    }
    let r = &ranges[idx - 1];
    (cp <= r.end).then_some(r.script)
}
