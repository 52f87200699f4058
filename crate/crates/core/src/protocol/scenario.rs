//! Plain-text protocol scenarios.
//!
//! ```text
//! # comments and blank lines are ignored
//! mode nih
//! players 3
//! bits 1
//! dims 2 8 4
//! turn 1 write-bit slot=0 bit=1
//! turn 2 compare-and-flag slot=0 flag=1 bit=1
//! turn 3 compare-and-report slot=0 flag=1 bit=1 report=1
//! turn 2 gate-by-flag flags=1 trash=2
//! turn 1 channel-not src=2 bit=1
//! turn 1 matrix
//! 0 1 0 0
//! ...
//! ```
//!
//! Players and bits are 1-based in the file. `src` names the player whose
//! input is read and defaults to the acting player. Matrix rows follow the
//! `turn … matrix` line, one per line, entries `re` or `re+imi`.

use std::fmt::Write as _;

use num_complex::Complex64;

use super::{Gate, InputBit, Mode, ProtocolSpec, Turn};
use crate::error::{Error, Result};
use crate::matrix::FloatMatrix;
use crate::scalar::FloatComplex;

pub(crate) fn parse_float_complex(tok: &str) -> Option<FloatComplex> {
    let tok = tok.trim();
    if let Ok(re) = tok.parse::<f64>() {
        return Some(Complex64::new(re, 0.0));
    }
    let body = tok.strip_suffix('i')?;
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&j| (bytes[j] == b'+' || bytes[j] == b'-') && !matches!(bytes[j - 1], b'e' | b'E'));
    match split {
        Some(j) => {
            let re = body[..j].parse::<f64>().ok()?;
            let im_str = &body[j..];
            let im = match im_str {
                "+" => 1.0,
                "-" => -1.0,
                s => s.strip_prefix('+').unwrap_or(s).parse::<f64>().ok()?,
            };
            Some(Complex64::new(re, im))
        }
        None => {
            let im = match body {
                "" | "+" => 1.0,
                "-" => -1.0,
                s => s.parse::<f64>().ok()?,
            };
            Some(Complex64::new(0.0, im))
        }
    }
}

pub(crate) fn format_float_complex(z: FloatComplex) -> String {
    if z.im == 0.0 {
        format!("{:?}", z.re)
    } else {
        format!("{:?}{}{:?}i", z.re, if z.im.is_sign_negative() { "" } else { "+" }, z.im)
    }
}

struct Fields<'a> {
    line: usize,
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> Fields<'a> {
    fn new(line: usize, toks: &[&'a str]) -> Result<Self> {
        let mut pairs = Vec::new();
        for t in toks {
            let (k, v) = t.split_once('=').ok_or_else(|| Error::parse(line, format!("expected key=value, got `{t}`")))?;
            if pairs.iter().any(|(k2, _)| *k2 == k) {
                return Err(Error::parse(line, format!("duplicate key `{k}`")));
            }
            pairs.push((k, v));
        }
        Ok(Fields { line, pairs })
    }

    fn raw(&self, key: &str) -> Option<&'a str> {
        self.pairs.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    }

    fn num(&self, key: &str) -> Result<usize> {
        let v = self.raw(key).ok_or_else(|| Error::parse(self.line, format!("missing `{key}`")))?;
        v.parse().map_err(|_| Error::parse(self.line, format!("`{key}` must be a non-negative integer, got `{v}`")))
    }

    fn list(&self, key: &str) -> Result<Vec<usize>> {
        let v = self.raw(key).ok_or_else(|| Error::parse(self.line, format!("missing `{key}`")))?;
        v.split(',')
            .map(|s| s.parse().map_err(|_| Error::parse(self.line, format!("bad entry `{s}` in `{key}`"))))
            .collect()
    }

    fn one_based(&self, key: &str) -> Result<usize> {
        match self.num(key)? {
            0 => Err(Error::parse(self.line, format!("`{key}` is 1-based"))),
            v => Ok(v - 1),
        }
    }

    /// The input bit named by `src` (default `player`) and `bit`.
    fn input(&self, player: usize) -> Result<InputBit> {
        let src = if self.raw("src").is_some() { self.one_based("src")? } else { player };
        Ok(InputBit { player: src, pos: self.one_based("bit")? })
    }

    fn only(&self, allowed: &[&str]) -> Result<()> {
        match self.pairs.iter().find(|(k, _)| !allowed.contains(k)) {
            Some((k, _)) => Err(Error::parse(self.line, format!("unknown key `{k}`"))),
            None => Ok(()),
        }
    }
}

fn header_value<'a>(line: usize, toks: &[&'a str], key: &str) -> Result<&'a str> {
    match toks {
        [_, v] => Ok(v),
        _ => Err(Error::parse(line, format!("`{key}` takes one value"))),
    }
}

fn parse_count(line: usize, v: &str, what: &str) -> Result<usize> {
    v.parse().map_err(|_| Error::parse(line, format!("{what} must be a non-negative integer, got `{v}`")))
}

pub fn parse_scenario(text: &str) -> Result<ProtocolSpec> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let (mut mode, mut players, mut bits, mut dims) = (None, None, None, None);
    let mut turns = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let (no, line) = lines[i];
        i += 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "mode" => {
                mode = Some(match header_value(no, &toks, "mode")? {
                    "nih" => Mode::Nih,
                    "nof" => Mode::Nof,
                    other => return Err(Error::parse(no, format!("unknown mode `{other}`"))),
                })
            }
            "players" => players = Some(parse_count(no, header_value(no, &toks, "players")?, "players")?),
            "bits" => bits = Some(parse_count(no, header_value(no, &toks, "bits")?, "bits")?),
            "dims" => {
                let d = toks[1..].iter().map(|t| parse_count(no, t, "dimension")).collect::<Result<Vec<_>>>()?;
                dims = Some((no, d));
            }
            "turn" => {
                if toks.len() < 3 {
                    return Err(Error::parse(no, "expected `turn <player> <gate> ...`"));
                }
                let player = match parse_count(no, toks[1], "player")? {
                    0 => return Err(Error::parse(no, "players are 1-based")),
                    p => p - 1,
                };
                let fields = Fields::new(no, &toks[3..])?;
                let gate = match toks[2] {
                    "write-bit" => {
                        fields.only(&["slot", "bit", "src"])?;
                        Gate::WriteBit { slot: fields.num("slot")?, input: fields.input(player)? }
                    }
                    "channel-not" => {
                        fields.only(&["bit", "src"])?;
                        let control = if fields.raw("bit").is_some() { Some(fields.input(player)?) } else { None };
                        Gate::ChannelNot { control }
                    }
                    "compare-and-flag" => {
                        fields.only(&["slot", "flag", "bit", "src"])?;
                        Gate::CompareAndFlag {
                            slot: fields.num("slot")?,
                            flag: fields.num("flag")?,
                            input: fields.input(player)?,
                        }
                    }
                    "compare-and-report" => {
                        fields.only(&["slot", "flag", "bit", "src", "report"])?;
                        Gate::CompareAndReport {
                            slot: fields.num("slot")?,
                            flag: fields.num("flag")?,
                            input: fields.input(player)?,
                            report: fields.list("report")?,
                        }
                    }
                    "gate-by-flag" => {
                        fields.only(&["flags", "trash"])?;
                        Gate::GateByFlag { flags: fields.list("flags")?, trash: fields.num("trash")? }
                    }
                    "matrix" => {
                        fields.only(&[])?;
                        let (_, d) = dims.as_ref().ok_or_else(|| Error::parse(no, "`dims` must precede a matrix turn"))?;
                        let size = 2 * *d.get(player).ok_or_else(|| Error::parse(no, format!("no player {}", player + 1)))?;
                        let mut data = Vec::with_capacity(size * size);
                        for _ in 0..size {
                            let &(rno, row) =
                                lines.get(i).ok_or_else(|| Error::parse(no, format!("matrix needs {size} rows")))?;
                            i += 1;
                            let entries: Vec<&str> = row.split_whitespace().collect();
                            if entries.len() != size {
                                return Err(Error::parse(rno, format!("expected {size} entries, got {}", entries.len())));
                            }
                            for e in entries {
                                data.push(
                                    parse_float_complex(e)
                                        .ok_or_else(|| Error::parse(rno, format!("bad complex number `{e}`")))?,
                                );
                            }
                        }
                        Gate::Matrix(FloatMatrix::new(size, size, data)?)
                    }
                    other => return Err(Error::parse(no, format!("unknown gate `{other}`"))),
                };
                turns.push((no, Turn { player, gate }));
            }
            other => return Err(Error::parse(no, format!("unknown directive `{other}`"))),
        }
    }
    let mode = mode.ok_or_else(|| Error::parse(0, "missing `mode`"))?;
    let bits = bits.ok_or_else(|| Error::parse(0, "missing `bits`"))?;
    let (dims_line, dims) = dims.ok_or_else(|| Error::parse(0, "missing `dims`"))?;
    if let Some(k) = players {
        if k != dims.len() {
            return Err(Error::parse(dims_line, format!("`players {k}` but {} dims", dims.len())));
        }
    }
    // Attribute validation errors to the offending turn's line.
    let turn_lines: Vec<usize> = turns.iter().map(|(no, _)| *no).collect();
    let turns: Vec<Turn> = turns.into_iter().map(|(_, t)| t).collect();
    ProtocolSpec::new(mode, bits, dims, turns).map_err(|e| {
        let at = match &e {
            Error::HiddenInput { turn, .. } | Error::NonUnitary { turn, .. } => turn_lines.get(turn - 1).copied(),
            _ => None,
        };
        match at {
            Some(line) => Error::parse(line, e.to_string()),
            None => Error::parse(dims_line, e.to_string()),
        }
    })
}

pub fn write_scenario(spec: &ProtocolSpec) -> String {
    let mut out = String::new();
    let mode = match spec.mode() {
        Mode::Nih => "nih",
        Mode::Nof => "nof",
    };
    let dims: Vec<String> = spec.player_dims().iter().map(usize::to_string).collect();
    let _ = writeln!(out, "mode {mode}\nplayers {}\nbits {}\ndims {}", spec.players(), spec.bits(), dims.join(" "));
    let input = |b: &InputBit| format!("src={} bit={}", b.player + 1, b.pos + 1);
    let list = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    for turn in spec.turns() {
        let p = turn.player + 1;
        let _ = match &turn.gate {
            Gate::WriteBit { slot, input: b } => writeln!(out, "turn {p} write-bit slot={slot} {}", input(b)),
            Gate::ChannelNot { control: None } => writeln!(out, "turn {p} channel-not"),
            Gate::ChannelNot { control: Some(b) } => writeln!(out, "turn {p} channel-not {}", input(b)),
            Gate::CompareAndFlag { slot, flag, input: b } => {
                writeln!(out, "turn {p} compare-and-flag slot={slot} flag={flag} {}", input(b))
            }
            Gate::CompareAndReport { slot, flag, input: b, report } => writeln!(
                out,
                "turn {p} compare-and-report slot={slot} flag={flag} {} report={}",
                input(b),
                list(report)
            ),
            Gate::GateByFlag { flags, trash } => {
                writeln!(out, "turn {p} gate-by-flag flags={} trash={trash}", list(flags))
            }
            Gate::Matrix(m) => {
                let _ = writeln!(out, "turn {p} matrix");
                for r in 0..m.rows() {
                    let row: Vec<String> = m.row(r).iter().map(|z| format_float_complex(*z)).collect();
                    let _ = writeln!(out, "{}", row.join(" "));
                }
                Ok(())
            }
            Gate::Lookup { watched, table } => {
                // no text form; emit as a comment so the output still parses
                writeln!(out, "# turn {p} lookup over players {} ({} matrices)", list(watched), table.len())
            }
        };
    }
    out
}
