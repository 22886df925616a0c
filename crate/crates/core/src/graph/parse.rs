use std::io::BufRead;
use std::net::Ipv4Addr;

use super::EdgeList;
use crate::error::{Error, Result};

/// Parses ITDK-style link records, clique-expanding each record.
///
/// Accepted lines are blank, `#` comments, or
/// `link <id>: <member> [<member> ...]` where a member is `N<digits>`
/// optionally followed by `:<ipv4>`; the interface address is discarded.
/// Malformed lines are counted and skipped unless `strict` is set.
pub fn parse_links<R: BufRead>(reader: R, strict: bool) -> Result<EdgeList> {
    let mut list = EdgeList::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        list.report.lines += 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut members: Vec<&str> = Vec::new();
        match split_link(trimmed, &mut members) {
            Ok(()) => {
                list.report.records += 1;
                list.add_clique(&members);
            }
            Err(msg) => {
                if strict {
                    return Err(Error::Parse { line: idx + 1, msg });
                }
                list.report.malformed_lines += 1;
            }
        }
    }
    Ok(list)
}

fn split_link<'a>(line: &'a str, members: &mut Vec<&'a str>) -> std::result::Result<(), String> {
    let rest = line
        .strip_prefix("link")
        .filter(|r| r.starts_with(char::is_whitespace))
        .ok_or_else(|| "expected `link <id>: <members>`".to_string())?;
    let (id, body) = rest
        .split_once(':')
        .ok_or_else(|| "missing `:` after link id".to_string())?;
    let id = id.trim();
    if id.is_empty() || id.contains(char::is_whitespace) {
        return Err(format!("bad link id `{id}`"));
    }
    for tok in body.split_whitespace() {
        members.push(member_name(tok)?);
    }
    if members.is_empty() {
        return Err(format!("link {id} has no members"));
    }
    Ok(())
}

fn member_name(tok: &str) -> std::result::Result<&str, String> {
    let (name, addr) = match tok.split_once(':') {
        Some((name, addr)) => (name, Some(addr)),
        None => (tok, None),
    };
    let digits = name
        .strip_prefix('N')
        .ok_or_else(|| format!("member `{tok}` is not N<digits>"))?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("member `{tok}` is not N<digits>"));
    }
    if let Some(addr) = addr {
        addr.parse::<Ipv4Addr>()
            .map_err(|_| format!("member `{tok}` has a bad IPv4 suffix"))?;
    }
    Ok(name)
}

/// Parses a canonical edge list (`a<TAB>b` per line, `#` comments).
pub fn parse_edge_tsv<R: BufRead>(reader: R, strict: bool) -> Result<EdgeList> {
    let mut list = EdgeList::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        list.report.lines += 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split('\t').map(str::trim);
        match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) if !a.is_empty() && !b.is_empty() => {
                list.report.records += 1;
                list.add_pair(a, b);
            }
            _ => {
                if strict {
                    return Err(Error::Parse {
                        line: idx + 1,
                        msg: "expected `name_a<TAB>name_b`".into(),
                    });
                }
                list.report.malformed_lines += 1;
            }
        }
    }
    Ok(list)
}
