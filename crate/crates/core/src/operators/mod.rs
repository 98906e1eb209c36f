//! Binary operators over relational specs.
//!
//! Each operator runs separately on the data table and on the style table.
//! Union is a full outer join, intersection an inner join, and difference
//! the pair of anti-joins. Rows are matched one-to-one, so duplicate rows
//! behave as a multiset.

mod join;
mod render;
mod repair;
mod setops;
mod union;

use std::fmt;
use std::str::FromStr;

use serde_json::Value;
use thiserror::Error;

use crate::relational::{DataTable, RelError, StyleRow};
use crate::value::ScalarValue;

pub use render::render_style_difference;
pub use repair::{assign_indicator_channel, repair_links, INDICATOR_CHANNELS};
pub use setops::{difference, intersect};
pub use union::{union, union_many, INDICATOR_COLUMN};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpError {
    #[error("data tables share no column")]
    DisjointColumns,
    #[error("no primary key could be inferred for the {0} data table")]
    NoKey(Side),
    #[error("cannot repair link `{path}`: no column available for `{column}`")]
    UnrepairableLink { path: String, column: String },
    #[error(transparent)]
    Rel(#[from] RelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// Join columns: inferred primary keys, or every shared column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum On {
    #[default]
    Key,
    All,
}

/// Conflict policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum How {
    Left,
    Right,
    #[default]
    Merge,
}

impl FromStr for On {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "key" => Ok(On::Key),
            "all" => Ok(On::All),
            _ => Err(format!("expected `key` or `all`, got `{s}`")),
        }
    }
}

impl FromStr for How {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "left" => Ok(How::Left),
            "right" => Ok(How::Right),
            "merge" => Ok(How::Merge),
            _ => Err(format!("expected `left`, `right` or `merge`, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpParams {
    pub on: On,
    pub how: How,
    pub auto_encoding: bool,
}

impl Default for OpParams {
    fn default() -> Self {
        OpParams {
            on: On::Key,
            how: How::Merge,
            auto_encoding: true,
        }
    }
}

impl OpParams {
    pub fn on(mut self, on: On) -> Self {
        self.on = on;
        self
    }

    pub fn how(mut self, how: How) -> Self {
        self.how = how;
        self
    }

    pub fn auto_encoding(mut self, flag: bool) -> Self {
        self.auto_encoding = flag;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Indicator {
    Left,
    Right,
    Both,
}

impl Indicator {
    pub fn as_str(self) -> &'static str {
        match self {
            Indicator::Left => "left",
            Indicator::Right => "right",
            Indicator::Both => "both",
        }
    }

    pub fn swapped(self) -> Self {
        match self {
            Indicator::Left => Indicator::Right,
            Indicator::Right => Indicator::Left,
            Indicator::Both => Indicator::Both,
        }
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Rows tagged with where they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkedTable<B> {
    pub base: B,
    pub indicator: Vec<Indicator>,
}

pub type MarkedData = MarkedTable<DataTable>;
pub type MarkedStyle = MarkedTable<Vec<StyleRow>>;

impl<B> MarkedTable<B> {
    pub fn len(&self) -> usize {
        self.indicator.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indicator.is_empty()
    }

    pub fn count(&self, which: Indicator) -> usize {
        self.indicator.iter().filter(|i| **i == which).count()
    }

    fn indicator_strs(&self) -> Vec<&'static str> {
        self.indicator.iter().map(|i| i.as_str()).collect()
    }
}

impl MarkedData {
    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.base
            .write_csv(&mut buf, Some(("indicator", &self.indicator_strs())))
            .expect("writing to memory");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }
}

impl MarkedStyle {
    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        crate::relational::StyleTable::write_csv(
            &self.base,
            &mut buf,
            Some(("indicator", &self.indicator_strs())),
        )
        .expect("writing to memory");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }

    /// Properties that appear with both a left and a right value.
    pub fn value_conflicts(&self) -> Vec<&StyleRow> {
        let mut out: Vec<&StyleRow> = Vec::new();
        for (row, ind) in self.base.iter().zip(&self.indicator) {
            if *ind == Indicator::Left
                && self
                    .base
                    .iter()
                    .zip(&self.indicator)
                    .any(|(r, i)| *i == Indicator::Right && r.path == row.path)
            {
                out.push(row);
            }
        }
        out
    }
}

/// Something the union had to decide or fix.
#[derive(Debug, Clone, PartialEq)]
pub enum Notice {
    StyleConflict {
        path: String,
        left: Value,
        right: Value,
        kept: Side,
    },
    DataConflict {
        key: Vec<(String, ScalarValue)>,
        columns: Vec<String>,
        resolution: How,
    },
    LinkRepaired {
        path: String,
        from: String,
        to: String,
    },
    ChannelAssigned {
        channel: String,
        column: String,
    },
    NoIdleChannel {
        column: String,
    },
}

impl fmt::Display for Notice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Notice::StyleConflict {
                path,
                left,
                right,
                kept,
            } => {
                write!(
                    f,
                    "style conflict at `{path}`: left {left}, right {right}; kept {kept}"
                )
            }
            Notice::DataConflict {
                key,
                columns,
                resolution,
            } => {
                let key: Vec<String> = key.iter().map(|(k, v)| format!("{k}={v}")).collect();
                let action = match resolution {
                    How::Left => "kept left",
                    How::Right => "kept right",
                    How::Merge => "kept both",
                };
                write!(
                    f,
                    "data conflict at <{}> on {}; {action}",
                    key.join(", "),
                    columns.join(", ")
                )
            }
            Notice::LinkRepaired { path, from, to } => {
                write!(f, "repaired link `{path}`: `{from}` -> `{to}`")
            }
            Notice::ChannelAssigned { channel, column } => {
                write!(f, "encoded `{column}` on channel {channel}")
            }
            Notice::NoIdleChannel { column } => {
                write!(f, "no idle channel for `{column}`; left unencoded")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnionResult {
    pub merged: crate::relational::RelViz,
    pub report: Vec<Notice>,
}
