//! Deterministic SQL corpus generator over the example fixture schema, plus
//! a non-semantic variant renderer. The generator emits plain SQL text and
//! never touches the canonicalizer, so pairs of renderings serve as an
//! independent oracle: a base query and its variant must stay equal under
//! both the exact-match and the execution route.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub const SEED: u64 = 0xD0C5;

#[derive(Debug, Clone, Copy)]
pub struct Column {
    pub name: &'static str,
    pub numeric: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct Table {
    pub name: &'static str,
    pub columns: &'static [Column],
    /// Every value distinct; safe for deterministic ORDER BY ... LIMIT.
    pub unique_column: &'static str,
}

pub const BETFRONT: Table = Table {
    name: "betfront",
    columns: &[
        Column {
            name: "year",
            numeric: true,
        },
        Column {
            name: "datetime",
            numeric: false,
        },
        Column {
            name: "country",
            numeric: false,
        },
        Column {
            name: "competion",
            numeric: false,
        },
        Column {
            name: "match",
            numeric: false,
        },
        Column {
            name: "home_opening",
            numeric: true,
        },
        Column {
            name: "away_opening",
            numeric: true,
        },
        Column {
            name: "home_closing",
            numeric: true,
        },
        Column {
            name: "away_closing",
            numeric: true,
        },
    ],
    unique_column: "datetime",
};

pub const FOOTBALL: Table = Table {
    name: "football_data",
    columns: &[
        Column {
            name: "season",
            numeric: false,
        },
        Column {
            name: "datetime",
            numeric: false,
        },
        Column {
            name: "div",
            numeric: false,
        },
        Column {
            name: "country",
            numeric: false,
        },
        Column {
            name: "league",
            numeric: false,
        },
        Column {
            name: "home_team",
            numeric: false,
        },
        Column {
            name: "away_team",
            numeric: false,
        },
        Column {
            name: "bwh",
            numeric: true,
        },
        Column {
            name: "bwd",
            numeric: true,
        },
        Column {
            name: "bwa",
            numeric: true,
        },
    ],
    unique_column: "datetime",
};

const STRING_VALUES: &[&str] = &[
    "Malta",
    "Albania",
    "Italy",
    "Spain",
    "Friendly",
    "Serie A",
    "I1",
    "2009/2010",
    "Portugal",
];
const LIKE_NEEDLES: &[&str] = &["Malta", "Albania", "ita", "20"];

#[derive(Debug, Clone)]
pub enum Pred {
    EqStr {
        col: &'static str,
        value: String,
    },
    EqNum {
        col: &'static str,
        value: i64,
    },
    CmpNum {
        col: &'static str,
        less: bool,
        value: String,
    },
    Like {
        col: &'static str,
        needle: String,
    },
    IsNull {
        col: &'static str,
        negated: bool,
    },
}

#[derive(Debug, Clone)]
pub enum Selection {
    Columns(Vec<&'static str>),
    CountStar,
    CountCol {
        col: &'static str,
        distinct: bool,
    },
    Agg {
        func: &'static str,
        col: &'static str,
    },
    GroupedAgg {
        group: &'static str,
        agg: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JoinShape {
    None,
    /// betfront JOIN football_data ON country = country, with a wildcard or
    /// count(*) selection; variants may swap table order or use a comma
    /// join, both non-semantic.
    CountriesStar,
    CountriesCount,
}

#[derive(Debug, Clone)]
pub struct GenQuery {
    pub table: Table,
    pub distinct: bool,
    pub selection: Selection,
    pub preds: Vec<Pred>,
    pub group_by: Option<&'static str>,
    pub order_by_unique: bool,
    pub limit: Option<u32>,
    pub union_countries: bool,
    pub join: JoinShape,
}

/// Rendering style knobs; every knob is non-semantic by construction.
#[derive(Debug, Clone, Default)]
pub struct Style {
    pub upper_keywords: bool,
    pub alias_table: bool,
    pub qualify_columns: bool,
    pub reverse_preds: bool,
    pub flip_eq_operands: bool,
    pub float_int_literals: bool,
    pub explicit_asc: bool,
    pub reverse_select: bool,
    pub leading_comment: bool,
    pub extra_whitespace: bool,
    pub swap_join_order: bool,
    pub comma_join: bool,
}

impl Style {
    pub fn random(rng: &mut ChaCha8Rng) -> Style {
        Style {
            upper_keywords: rng.gen(),
            alias_table: rng.gen(),
            qualify_columns: rng.gen(),
            reverse_preds: rng.gen(),
            flip_eq_operands: rng.gen(),
            float_int_literals: rng.gen(),
            explicit_asc: rng.gen(),
            reverse_select: rng.gen(),
            leading_comment: rng.gen(),
            extra_whitespace: rng.gen(),
            swap_join_order: rng.gen(),
            comma_join: rng.gen(),
        }
    }
}

pub struct Generator {
    rng: ChaCha8Rng,
}

impl Generator {
    pub fn new(seed: u64) -> Self {
        Generator {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn pick_column(&mut self, table: &Table, numeric: Option<bool>) -> Column {
        let candidates: Vec<&Column> = table
            .columns
            .iter()
            .filter(|c| numeric.is_none_or(|n| c.numeric == n))
            .collect();
        **candidates.choose(&mut self.rng).expect("column pool")
    }

    fn gen_pred(&mut self, table: &Table) -> Pred {
        match self.rng.gen_range(0..5) {
            0 => Pred::EqStr {
                col: self.pick_column(table, Some(false)).name,
                value: STRING_VALUES.choose(&mut self.rng).unwrap().to_string(),
            },
            // Integer equality only makes sense on betfront.year; other
            // numeric columns are odds with fractional values.
            1 if table.name == "betfront" => Pred::EqNum {
                col: "year",
                value: self.rng.gen_range(2009..2014),
            },
            1 => Pred::CmpNum {
                col: self.pick_column(table, Some(true)).name,
                less: self.rng.gen(),
                value: "3".to_string(),
            },
            2 => Pred::CmpNum {
                col: self.pick_column(table, Some(true)).name,
                less: self.rng.gen(),
                value: ["2", "3", "1.5", "2011"]
                    .choose(&mut self.rng)
                    .unwrap()
                    .to_string(),
            },
            3 => Pred::Like {
                col: self.pick_column(table, Some(false)).name,
                needle: LIKE_NEEDLES.choose(&mut self.rng).unwrap().to_string(),
            },
            _ => Pred::IsNull {
                col: self.pick_column(table, None).name,
                negated: self.rng.gen(),
            },
        }
    }

    pub fn gen_query(&mut self) -> GenQuery {
        let plain = GenQuery {
            table: BETFRONT,
            distinct: false,
            selection: Selection::Columns(vec!["country"]),
            preds: Vec::new(),
            group_by: None,
            order_by_unique: false,
            limit: None,
            union_countries: false,
            join: JoinShape::None,
        };
        if self.rng.gen_ratio(1, 12) {
            return GenQuery {
                union_countries: true,
                ..plain
            };
        }
        if self.rng.gen_ratio(1, 10) {
            let join = if self.rng.gen() {
                JoinShape::CountriesStar
            } else {
                JoinShape::CountriesCount
            };
            return GenQuery { join, ..plain };
        }
        let table = if self.rng.gen() { BETFRONT } else { FOOTBALL };
        let mut group_by = None;
        let selection = match self.rng.gen_range(0..5) {
            0 => {
                let n = self.rng.gen_range(1..=3);
                let mut cols: Vec<&'static str> = Vec::new();
                for _ in 0..n {
                    let col = self.pick_column(&table, None).name;
                    if !cols.contains(&col) {
                        cols.push(col);
                    }
                }
                Selection::Columns(cols)
            }
            1 => Selection::CountStar,
            2 => Selection::CountCol {
                col: self.pick_column(&table, None).name,
                distinct: self.rng.gen(),
            },
            3 => Selection::Agg {
                func: ["min", "max", "avg"].choose(&mut self.rng).unwrap(),
                col: self.pick_column(&table, Some(true)).name,
            },
            _ => {
                let group = self.pick_column(&table, Some(false)).name;
                group_by = Some(group);
                Selection::GroupedAgg {
                    group,
                    agg: "count(*)".to_string(),
                }
            }
        };
        let distinct = matches!(selection, Selection::Columns(_)) && self.rng.gen_ratio(1, 3);
        let pred_count = self.rng.gen_range(0..=2);
        let preds = (0..pred_count).map(|_| self.gen_pred(&table)).collect();
        // ORDER BY only over the unique column so equivalent renderings
        // cannot disagree on tie order; LIMIT only when ordered.
        let order_by_unique = group_by.is_none()
            && matches!(selection, Selection::Columns(_))
            && self.rng.gen_ratio(1, 3);
        let limit = if order_by_unique && self.rng.gen() {
            Some(self.rng.gen_range(1..6))
        } else {
            None
        };
        GenQuery {
            table,
            distinct,
            selection,
            preds,
            group_by,
            order_by_unique,
            limit,
            union_countries: false,
            join: JoinShape::None,
        }
    }
}

fn keyword(word: &str, style: &Style) -> String {
    if style.upper_keywords {
        word.to_uppercase()
    } else {
        word.to_string()
    }
}

fn render_num(value: &str, style: &Style) -> String {
    if style.float_int_literals && !value.contains('.') {
        format!("{value}.0")
    } else {
        value.to_string()
    }
}

fn render_pred(pred: &Pred, qualifier: &str, style: &Style) -> String {
    let column = |col: &str| {
        if qualifier.is_empty() {
            col.to_string()
        } else {
            format!("{qualifier}.{col}")
        }
    };
    match pred {
        Pred::EqStr { col, value } => {
            if style.flip_eq_operands {
                format!("'{value}' = {}", column(col))
            } else {
                format!("{} = '{value}'", column(col))
            }
        }
        Pred::EqNum { col, value } => {
            let literal = render_num(&value.to_string(), style);
            if style.flip_eq_operands {
                format!("{literal} = {}", column(col))
            } else {
                format!("{} = {literal}", column(col))
            }
        }
        Pred::CmpNum { col, less, value } => {
            let literal = render_num(value, style);
            match (less, style.flip_eq_operands) {
                (true, false) => format!("{} < {literal}", column(col)),
                (true, true) => format!("{literal} > {}", column(col)),
                (false, false) => format!("{} > {literal}", column(col)),
                (false, true) => format!("{literal} < {}", column(col)),
            }
        }
        Pred::Like { col, needle } => {
            format!("{} {} '%{needle}%'", column(col), keyword("like", style))
        }
        Pred::IsNull { col, negated } => {
            let suffix = if *negated { "is not null" } else { "is null" };
            format!("{} {}", column(col), keyword(suffix, style))
        }
    }
}

/// Renders a generated query in a given style. All styles of the same query
/// are semantically identical.
pub fn render(query: &GenQuery, style: &Style) -> String {
    if query.union_countries {
        return format!(
            "{} country {} betfront {} {} country {} football_data",
            keyword("select", style),
            keyword("from", style),
            keyword("union", style),
            keyword("select", style),
            keyword("from", style),
        );
    }
    if query.join != JoinShape::None {
        let items = match query.join {
            JoinShape::CountriesStar => "*".to_string(),
            _ => "count(*)".to_string(),
        };
        let (left, right) = if style.swap_join_order {
            ("football_data", "betfront")
        } else {
            ("betfront", "football_data")
        };
        let on_cond = if style.flip_eq_operands {
            "football_data.country = betfront.country"
        } else {
            "betfront.country = football_data.country"
        };
        return if style.comma_join {
            format!(
                "{} {items} {} {left}, {right} {} {on_cond}",
                keyword("select", style),
                keyword("from", style),
                keyword("where", style),
            )
        } else {
            format!(
                "{} {items} {} {left} {} {right} {} {on_cond}",
                keyword("select", style),
                keyword("from", style),
                keyword("join", style),
                keyword("on", style),
            )
        };
    }

    let alias = if style.alias_table { "t" } else { "" };
    let qualifier = if style.alias_table {
        "t"
    } else if style.qualify_columns {
        query.table.name
    } else {
        ""
    };
    let column = |col: &str| {
        if qualifier.is_empty() {
            col.to_string()
        } else {
            format!("{qualifier}.{col}")
        }
    };

    let mut select_items: Vec<String> = match &query.selection {
        Selection::Columns(cols) => cols.iter().map(|c| column(c)).collect(),
        Selection::CountStar => vec!["count(*)".to_string()],
        Selection::CountCol { col, distinct } => {
            let inner = if *distinct {
                format!("{} {}", keyword("distinct", style), column(col))
            } else {
                column(col)
            };
            vec![format!("count({inner})")]
        }
        Selection::Agg { func, col } => vec![format!("{func}({})", column(col))],
        Selection::GroupedAgg { group, agg } => vec![column(group), agg.clone()],
    };
    if style.reverse_select {
        select_items.reverse();
    }

    let mut sql = String::new();
    if style.leading_comment {
        sql.push_str("-- generated\n");
    }
    sql.push_str(&keyword("select", style));
    sql.push(' ');
    if query.distinct {
        sql.push_str(&keyword("distinct", style));
        sql.push(' ');
    }
    sql.push_str(&select_items.join(", "));
    sql.push(' ');
    sql.push_str(&keyword("from", style));
    sql.push(' ');
    sql.push_str(query.table.name);
    if !alias.is_empty() {
        sql.push(' ');
        sql.push_str(alias);
    }

    if !query.preds.is_empty() {
        let mut preds: Vec<String> = query
            .preds
            .iter()
            .map(|p| render_pred(p, qualifier, style))
            .collect();
        if style.reverse_preds {
            preds.reverse();
        }
        sql.push(' ');
        sql.push_str(&keyword("where", style));
        sql.push(' ');
        sql.push_str(&preds.join(&format!(" {} ", keyword("and", style))));
    }

    if let Some(group) = query.group_by {
        sql.push(' ');
        sql.push_str(&keyword("group by", style));
        sql.push(' ');
        sql.push_str(&column(group));
    }

    if query.order_by_unique {
        sql.push(' ');
        sql.push_str(&keyword("order by", style));
        sql.push(' ');
        sql.push_str(&column(query.table.unique_column));
        if style.explicit_asc {
            sql.push(' ');
            sql.push_str(&keyword("asc", style));
        }
    }

    if let Some(limit) = query.limit {
        sql.push(' ');
        sql.push_str(&keyword("limit", style));
        sql.push(' ');
        sql.push_str(&limit.to_string());
    }

    if style.extra_whitespace {
        sql = double_spaces_outside_strings(&sql);
    }
    sql
}

/// Doubles every space except inside single-quoted literals, whose content
/// is semantic.
fn double_spaces_outside_strings(sql: &str) -> String {
    let mut out = String::with_capacity(sql.len() * 2);
    let mut in_string = false;
    for ch in sql.chars() {
        if ch == '\'' {
            in_string = !in_string;
        }
        if ch == ' ' && !in_string {
            out.push_str("  ");
        } else {
            out.push(ch);
        }
    }
    out
}
