//! Bundled example inputs: a small football-betting database with the
//! ambiguity patterns the toolkit documents (mixed season formats, odds
//! columns with missing values, duplicated match strings), a hand-authored
//! documentation set, and a 45-query benchmark over it. Used by tests, the
//! benchmarks, and the CLI smoke tests.

use std::path::{Path, PathBuf};

use crate::docs::{DocEntry, DocKind, DocSet, Provenance, QuerySpec, Scope};

pub const EXAMPLE_DATABASE_NAME: &str = "soccer";

/// Creates the example database file under `dir` and returns its path.
pub fn example_database(dir: &Path) -> PathBuf {
    let path = dir.join(format!("{EXAMPLE_DATABASE_NAME}.db"));
    if path.exists() {
        return path;
    }
    let conn = rusqlite::Connection::open(&path).expect("create fixture db");
    conn.execute_batch(
        "CREATE TABLE betfront (
            year INTEGER,
            datetime TEXT,
            country TEXT,
            competion TEXT,
            match TEXT,
            home_opening REAL,
            away_opening REAL,
            home_closing REAL,
            away_closing REAL
        );
        CREATE TABLE football_data (
            season TEXT,
            datetime TEXT,
            div TEXT,
            country TEXT,
            league TEXT,
            home_team TEXT,
            away_team TEXT,
            bwh REAL,
            bwd REAL,
            bwa REAL
        );",
    )
    .expect("create fixture tables");

    type BetfrontRow = (
        i64,
        &'static str,
        &'static str,
        &'static str,
        &'static str,
        f64,
        f64,
        f64,
        f64,
    );
    let betfront: &[BetfrontRow] = &[
        (
            2009,
            "2009-08-12",
            "Malta",
            "Friendly",
            "Malta - Albania",
            2.10,
            3.40,
            2.05,
            3.50,
        ),
        (
            2009,
            "2009-09-05",
            "Italy",
            "World Cup Qualification",
            "Italy - Spain",
            2.60,
            2.80,
            2.55,
            2.85,
        ),
        (
            2010,
            "2010-03-03",
            "Malta",
            "Friendly",
            "Malta - Italy",
            4.20,
            1.80,
            4.10,
            1.85,
        ),
        (
            2010,
            "2010-06-11",
            "Spain",
            "World Cup Qualification",
            "Spain - Albania",
            1.30,
            9.00,
            1.28,
            9.50,
        ),
        (
            2010,
            "2010-09-07",
            "Albania",
            "EURO Qualification",
            "Albania - Italy",
            5.50,
            1.60,
            5.60,
            1.58,
        ),
        (
            2010,
            "2010-10-08",
            "Malta",
            "EURO Qualification",
            "Malta - Spain",
            8.00,
            1.35,
            8.20,
            1.33,
        ),
        (
            2011,
            "2011-03-26",
            "Italy",
            "EURO Qualification",
            "Italy - Malta",
            1.20,
            12.00,
            1.18,
            12.50,
        ),
        (
            2011,
            "2011-06-04",
            "Albania",
            "Friendly",
            "Albania - Spain",
            6.50,
            1.45,
            6.60,
            1.44,
        ),
        (
            2012,
            "2012-02-29",
            "Spain",
            "Friendly",
            "Spain - Italy",
            2.20,
            3.10,
            2.15,
            3.20,
        ),
        (
            2012,
            "2012-10-16",
            "Albania",
            "World Cup Qualification",
            "Albania - Malta",
            2.40,
            2.90,
            2.35,
            2.95,
        ),
        (
            2013,
            "2013-03-22",
            "Malta",
            "World Cup Qualification",
            "Malta - Albania",
            3.80,
            2.00,
            3.75,
            2.05,
        ),
        (
            2013,
            "2013-06-07",
            "Italy",
            "Friendly",
            "Italy - Albania",
            1.40,
            7.50,
            1.38,
            7.80,
        ),
    ];
    for row in betfront {
        conn.execute(
            "INSERT INTO betfront VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9)",
            rusqlite::params![row.0, row.1, row.2, row.3, row.4, row.5, row.6, row.7, row.8],
        )
        .expect("insert betfront row");
    }

    // One season value is a bare year: the seeded value-consistency outlier.
    // bwd is NULL in 3 of 10 rows.
    type FootballRow = (
        &'static str,
        &'static str,
        &'static str,
        &'static str,
        &'static str,
        &'static str,
        &'static str,
        f64,
        Option<f64>,
        f64,
    );
    let football: &[FootballRow] = &[
        (
            "2009/2010",
            "2009-08-23",
            "I1",
            "Italy",
            "Serie A",
            "Juventus",
            "Roma",
            1.85,
            None,
            4.20,
        ),
        (
            "2009/2010",
            "2009-09-13",
            "SP1",
            "Spain",
            "La Liga",
            "Barcelona",
            "Sevilla",
            1.30,
            Some(5.25),
            9.00,
        ),
        (
            "2009/2010",
            "2010-01-17",
            "I1",
            "Italy",
            "Serie A",
            "Milan",
            "Inter",
            2.40,
            Some(3.10),
            2.90,
        ),
        (
            "2010/2011",
            "2010-08-29",
            "M1",
            "Malta",
            "Premier League",
            "Valletta",
            "Floriana",
            1.95,
            Some(3.30),
            3.60,
        ),
        (
            "2010/2011",
            "2011-04-02",
            "SP1",
            "Spain",
            "La Liga",
            "Madrid",
            "Valencia",
            1.45,
            Some(4.40),
            6.50,
        ),
        (
            "2011/2012",
            "2011-10-23",
            "A1",
            "Albania",
            "Superliga",
            "Tirana",
            "Partizani",
            2.10,
            None,
            3.20,
        ),
        (
            "2011/2012",
            "2012-03-11",
            "I1",
            "Italy",
            "Serie A",
            "Napoli",
            "Lazio",
            1.75,
            Some(3.50),
            4.60,
        ),
        (
            "2012/2013",
            "2012-09-02",
            "M1",
            "Malta",
            "Premier League",
            "Birkirkara",
            "Valletta",
            2.30,
            Some(3.05),
            2.95,
        ),
        (
            "2012/2013",
            "2013-05-19",
            "SP1",
            "Spain",
            "La Liga",
            "Sevilla",
            "Madrid",
            3.90,
            Some(3.60),
            1.90,
        ),
        (
            "2012",
            "2012-07-01",
            "A1",
            "Albania",
            "Superliga",
            "Partizani",
            "Tirana",
            2.05,
            None,
            3.40,
        ),
    ];
    for row in football {
        conn.execute(
            "INSERT INTO football_data VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10)",
            rusqlite::params![row.0, row.1, row.2, row.3, row.4, row.5, row.6, row.7, row.8, row.9],
        )
        .expect("insert football_data row");
    }
    path
}

fn human(id: &str, kind: DocKind, table: &str, column: Option<&str>, text: &str) -> DocEntry {
    DocEntry {
        id: id.to_string(),
        kind,
        scope: Scope {
            table: table.to_string(),
            column: column.map(str::to_string),
        },
        text: text.to_string(),
        provenance: Provenance::Human,
    }
}

/// Human-authored documentation entries for the example database.
pub fn example_entries() -> Vec<DocEntry> {
    vec![
        human(
            "nd-football-bwd",
            DocKind::NameDescription,
            "football_data",
            Some("bwd"),
            "bwd means Bet&Win draw odds.",
        ),
        human(
            "nd-football-bwh",
            DocKind::NameDescription,
            "football_data",
            Some("bwh"),
            "bwh means Bet&Win home win odds.",
        ),
        human(
            "nd-football-bwa",
            DocKind::NameDescription,
            "football_data",
            Some("bwa"),
            "bwa means Bet&Win away win odds.",
        ),
        human(
            "nd-betfront-competion",
            DocKind::NameDescription,
            "betfront",
            Some("competion"),
            "competion is a misspelling of competition: the tournament the match belongs to.",
        ),
        human(
            "nd-betfront-match",
            DocKind::NameDescription,
            "betfront",
            Some("match"),
            "match names the two teams that played.",
        ),
        human(
            "nd-betfront-year",
            DocKind::NameDescription,
            "betfront",
            Some("year"),
            "year is the calendar year the match was played in.",
        ),
        human(
            "vc-betfront-match",
            DocKind::ValueConsistency,
            "betfront",
            Some("match"),
            "Matches are consistently denoted in the format of 'home team - away team', \
             for example, 'Malta - Albania'. There are no outliers.",
        ),
        human(
            "vc-football-season",
            DocKind::ValueConsistency,
            "football_data",
            Some("season"),
            "Seasons are mostly denoted as 'Year1/Year2', for example, '2009/2010'; \
             the value '2012' is a single year outlier.",
        ),
        human(
            "vc-betfront-year",
            DocKind::ValueConsistency,
            "betfront",
            Some("year"),
            "Years are consistently four-digit calendar years. There are no outliers.",
        ),
        human(
            "cov-football",
            DocKind::Coverage,
            "football_data",
            None,
            "'football_data' covers all the matches only from 2009-2013.",
        ),
        human(
            "cov-betfront",
            DocKind::Coverage,
            "betfront",
            None,
            "'betfront' covers all the matches from 2009 to 2013; no match is missing.",
        ),
        human(
            "gr-betfront",
            DocKind::Granularity,
            "betfront",
            None,
            "Each row in 'betfront' reports for each unique match in each competition, \
             the detailed time, location and betting records. It is not aggregated.",
        ),
        human(
            "gr-football",
            DocKind::Granularity,
            "football_data",
            None,
            "Each row in 'football_data' is one played match with its betting odds. \
             It is not aggregated.",
        ),
    ]
}

struct QueryRow {
    id: &'static str,
    original: &'static str,
    disambiguated: &'static str,
    output_clause: &'static str,
    gold: &'static str,
    fix_note: Option<&'static str>,
}

const QUERIES: &[QueryRow] = &[
    QueryRow {
        id: "q01",
        original: "Which year has the most matches?",
        disambiguated: "In which year did the most matches take place?",
        output_clause: "The output must only contain the year.",
        gold: "SELECT YEAR FROM betfront GROUP BY YEAR ORDER BY count(*) DESC LIMIT 1",
        fix_note: None,
    },
    QueryRow {
        id: "q02",
        original: "How many matches are there?",
        disambiguated: "How many betting-market matches are recorded in betfront?",
        output_clause: "The output must only contain the count.",
        gold: "SELECT count(*) FROM betfront",
        fix_note: None,
    },
    QueryRow {
        id: "q03",
        original: "How many countries are there?",
        disambiguated: "How many distinct countries appear in betfront?",
        output_clause: "The output must only contain the count.",
        gold: "SELECT count(DISTINCT country) FROM betfront",
        fix_note: Some("original answer used count(country) without DISTINCT"),
    },
    QueryRow {
        id: "q04",
        original: "List the countries.",
        disambiguated: "List each distinct country present in betfront.",
        output_clause: "The output must only contain country names.",
        gold: "SELECT DISTINCT country FROM betfront",
        fix_note: None,
    },
    QueryRow {
        id: "q05",
        original: "Which matches did Malta play?",
        disambiguated: "Which matches in betfront include Malta as one of the teams?",
        output_clause: "The output must only contain the match.",
        gold: "SELECT match FROM betfront WHERE match LIKE '%Malta%'",
        fix_note: None,
    },
    QueryRow {
        id: "q06",
        original: "What is the earliest year?",
        disambiguated: "What is the earliest calendar year recorded in betfront?",
        output_clause: "The output must only contain the year.",
        gold: "SELECT min(year) FROM betfront",
        fix_note: None,
    },
    QueryRow {
        id: "q07",
        original: "What is the latest year?",
        disambiguated: "What is the latest calendar year recorded in betfront?",
        output_clause: "The output must only contain the year.",
        gold: "SELECT max(year) FROM betfront",
        fix_note: None,
    },
    QueryRow {
        id: "q08",
        original: "How many matches per country?",
        disambiguated: "For each country in betfront, how many matches were played there?",
        output_clause: "The output must contain the country and the count.",
        gold: "SELECT country, count(*) FROM betfront GROUP BY country",
        fix_note: None,
    },
    QueryRow {
        id: "q09",
        original: "Which countries hosted more than 2 matches?",
        disambiguated: "Which countries in betfront hosted more than two matches?",
        output_clause: "The output must only contain country names.",
        gold: "SELECT country FROM betfront GROUP BY country HAVING count(*) > 2",
        fix_note: None,
    },
    QueryRow {
        id: "q10",
        original: "Which matches happened in 2010?",
        disambiguated: "Which matches in betfront were played during the calendar year 2010?",
        output_clause: "The output must only contain the match.",
        gold: "SELECT match FROM betfront WHERE year = 2010",
        fix_note: None,
    },
    QueryRow {
        id: "q11",
        original: "What is the average home opening odd?",
        disambiguated: "What is the average of the home_opening odds over all betfront rows?",
        output_clause: "The output must only contain the average.",
        gold: "SELECT avg(home_opening) FROM betfront",
        fix_note: None,
    },
    QueryRow {
        id: "q12",
        original: "What is the highest away closing odd?",
        disambiguated: "What is the maximum away_closing value in betfront?",
        output_clause: "The output must only contain the maximum.",
        gold: "SELECT max(away_closing) FROM betfront",
        fix_note: None,
    },
    QueryRow {
        id: "q13",
        original: "Which match had the highest home opening odd?",
        disambiguated: "Which betfront match has the largest home_opening value?",
        output_clause: "The output must only contain the match.",
        gold: "SELECT match FROM betfront ORDER BY home_opening DESC LIMIT 1",
        fix_note: None,
    },
    QueryRow {
        id: "q14",
        original: "List matches by date.",
        disambiguated: "List betfront matches ordered by their datetime, earliest first.",
        output_clause: "The output must only contain the match.",
        gold: "SELECT match FROM betfront ORDER BY datetime",
        fix_note: None,
    },
    QueryRow {
        id: "q15",
        original: "What competitions are there?",
        disambiguated: "List each distinct competition in betfront.",
        output_clause: "The output must only contain the competition.",
        gold: "SELECT DISTINCT competion FROM betfront",
        fix_note: None,
    },
    QueryRow {
        id: "q16",
        original: "How many matches per competition?",
        disambiguated: "For each competition in betfront, how many matches does it contain?",
        output_clause: "The output must contain the competition and the count.",
        gold: "SELECT competion, count(*) FROM betfront GROUP BY competion",
        fix_note: None,
    },
    QueryRow {
        id: "q17",
        original: "How many friendlies are there?",
        disambiguated: "How many betfront matches belong to the Friendly competition?",
        output_clause: "The output must only contain the count.",
        gold: "SELECT count(*) FROM betfront WHERE competion = 'Friendly'",
        fix_note: None,
    },
    QueryRow {
        id: "q18",
        original: "What seasons are covered?",
        disambiguated: "List each distinct season value in football_data.",
        output_clause: "The output must only contain the season.",
        gold: "SELECT DISTINCT season FROM football_data",
        fix_note: None,
    },
    QueryRow {
        id: "q19",
        original: "How many league matches are there?",
        disambiguated: "How many rows does football_data contain?",
        output_clause: "The output must only contain the count.",
        gold: "SELECT count(*) FROM football_data",
        fix_note: None,
    },
    QueryRow {
        id: "q20",
        original: "What leagues are there?",
        disambiguated: "List each distinct league in football_data.",
        output_clause: "The output must only contain the league.",
        gold: "SELECT DISTINCT league FROM football_data",
        fix_note: None,
    },
    QueryRow {
        id: "q21",
        original: "How many matches per season?",
        disambiguated: "For each season value in football_data, how many matches does it contain?",
        output_clause: "The output must contain the season and the count.",
        gold: "SELECT season, count(*) FROM football_data GROUP BY season",
        fix_note: None,
    },
    QueryRow {
        id: "q22",
        original: "Which home teams were strong favourites?",
        disambiguated: "Which football_data home teams had home win odds below 2?",
        output_clause: "The output must only contain the home team.",
        gold: "SELECT home_team FROM football_data WHERE bwh < 2",
        fix_note: None,
    },
    QueryRow {
        id: "q23",
        original: "How many matches have no draw odds?",
        disambiguated: "How many football_data rows are missing the bwd draw odds value?",
        output_clause: "The output must only contain the count.",
        gold: "SELECT count(*) FROM football_data WHERE bwd IS NULL",
        fix_note: Some("original answer checked bwd = '' instead of IS NULL"),
    },
    QueryRow {
        id: "q24",
        original: "How many Italian matches are there?",
        disambiguated: "How many football_data rows have Italy as the country?",
        output_clause: "The output must only contain the count.",
        gold: "SELECT count(*) FROM football_data WHERE country = 'Italy'",
        fix_note: None,
    },
    QueryRow {
        id: "q25",
        original: "Which teams hosted in division I1?",
        disambiguated: "Which football_data home teams played in the division labelled I1?",
        output_clause: "The output must only contain the home team.",
        gold: "SELECT home_team FROM football_data WHERE div = 'I1'",
        fix_note: None,
    },
    QueryRow {
        id: "q26",
        original: "What is the highest draw odd?",
        disambiguated: "What is the maximum bwd value in football_data?",
        output_clause: "The output must only contain the maximum.",
        gold: "SELECT max(bwd) FROM football_data",
        fix_note: None,
    },
    QueryRow {
        id: "q27",
        original: "Which seasons did Spain play in?",
        disambiguated: "List the season of every football_data row whose country is Spain.",
        output_clause: "The output must only contain the season.",
        gold: "SELECT season FROM football_data WHERE country = 'Spain'",
        fix_note: None,
    },
    QueryRow {
        id: "q28",
        original: "What is the first season?",
        disambiguated: "What is the smallest season value in football_data?",
        output_clause: "The output must only contain the season.",
        gold: "SELECT min(season) FROM football_data",
        fix_note: None,
    },
    QueryRow {
        id: "q29",
        original: "Which countries appear in both tables?",
        disambiguated: "Which countries appear in both betfront and football_data?",
        output_clause: "The output must only contain country names.",
        gold: "SELECT country FROM betfront INTERSECT SELECT country FROM football_data",
        fix_note: None,
    },
    QueryRow {
        id: "q30",
        original: "Which countries appear anywhere?",
        disambiguated: "Which countries appear in betfront or football_data, without duplicates?",
        output_clause: "The output must only contain country names.",
        gold: "SELECT country FROM betfront UNION SELECT country FROM football_data",
        fix_note: None,
    },
    QueryRow {
        id: "q31",
        original: "How many cross-table country pairings are there?",
        disambiguated: "How many betfront and football_data row pairs share the same country?",
        output_clause: "The output must only contain the count.",
        gold: "SELECT count(*) FROM betfront JOIN football_data ON betfront.country = football_data.country",
        fix_note: None,
    },
    QueryRow {
        id: "q32",
        original: "Which matches did Albania play away?",
        disambiguated: "Which betfront matches list Albania as the away team?",
        output_clause: "The output must only contain the match.",
        gold: "SELECT match FROM betfront WHERE match LIKE '%- Albania'",
        fix_note: None,
    },
    QueryRow {
        id: "q33",
        original: "In which years did Italy host?",
        disambiguated: "List the distinct years of betfront matches whose country is Italy.",
        output_clause: "The output must only contain the year.",
        gold: "SELECT DISTINCT year FROM betfront WHERE country = 'Italy'",
        fix_note: None,
    },
    QueryRow {
        id: "q34",
        original: "How many different matches are there?",
        disambiguated: "How many distinct match values does betfront contain?",
        output_clause: "The output must only contain the count.",
        gold: "SELECT count(DISTINCT match) FROM betfront",
        fix_note: None,
    },
    QueryRow {
        id: "q35",
        original: "What is the average draw odd per league?",
        disambiguated: "For each football_data league, what is the average bwd value?",
        output_clause: "The output must contain the league and the average.",
        gold: "SELECT league, avg(bwd) FROM football_data GROUP BY league",
        fix_note: None,
    },
    QueryRow {
        id: "q36",
        original: "Which team hosted the most games?",
        disambiguated: "Which football_data home team appears most often?",
        output_clause: "The output must only contain the home team.",
        gold: "SELECT home_team FROM football_data GROUP BY home_team ORDER BY count(*) DESC, home_team LIMIT 1",
        fix_note: None,
    },
    QueryRow {
        id: "q37",
        original: "Which matches happened after 2011?",
        disambiguated: "Which betfront matches were played in a year later than 2011?",
        output_clause: "The output must only contain the match.",
        gold: "SELECT match FROM betfront WHERE year > 2011",
        fix_note: None,
    },
    QueryRow {
        id: "q38",
        original: "How often was the home side favoured at open?",
        disambiguated: "In how many betfront rows is home_opening lower than away_opening?",
        output_clause: "The output must only contain the count.",
        gold: "SELECT count(*) FROM betfront WHERE home_opening < away_opening",
        fix_note: None,
    },
    QueryRow {
        id: "q39",
        original: "What was the first match?",
        disambiguated: "Which betfront match has the earliest datetime?",
        output_clause: "The output must only contain the match.",
        gold: "SELECT match FROM betfront ORDER BY datetime LIMIT 1",
        fix_note: None,
    },
    QueryRow {
        id: "q40",
        original: "What competitions ran in 2012?",
        disambiguated: "List the distinct competitions of betfront matches played in 2012.",
        output_clause: "The output must only contain the competition.",
        gold: "SELECT DISTINCT competion FROM betfront WHERE year = 2012",
        fix_note: None,
    },
    QueryRow {
        id: "q41",
        original: "Which teams visited in Serie A?",
        disambiguated: "List the distinct away teams of football_data rows in the Serie A league.",
        output_clause: "The output must only contain the away team.",
        gold: "SELECT DISTINCT away_team FROM football_data WHERE league = 'Serie A'",
        fix_note: None,
    },
    QueryRow {
        id: "q42",
        original: "Which Spanish matches have odds?",
        disambiguated: "List the match and home_opening of betfront rows whose country is Spain.",
        output_clause: "The output must contain the match and the home opening odds.",
        gold: "SELECT match, home_opening FROM betfront WHERE country = 'Spain'",
        fix_note: None,
    },
    QueryRow {
        id: "q43",
        original: "How many matches per country in the league data?",
        disambiguated: "For each country in football_data, how many rows does it have?",
        output_clause: "The output must contain the country and the count.",
        gold: "SELECT country, count(*) FROM football_data GROUP BY country",
        fix_note: None,
    },
    QueryRow {
        id: "q44",
        original: "Which seasons had long draw odds?",
        disambiguated: "List the distinct seasons of football_data rows with bwd greater than 3.",
        output_clause: "The output must only contain the season.",
        gold: "SELECT DISTINCT season FROM football_data WHERE bwd > 3",
        fix_note: None,
    },
    QueryRow {
        id: "q45",
        original: "Which country hosted the most matches?",
        disambiguated: "Which betfront country appears in the most rows?",
        output_clause: "The output must only contain the country.",
        gold: "SELECT country FROM betfront GROUP BY country ORDER BY count(*) DESC LIMIT 1",
        fix_note: None,
    },
];

/// The 45-query benchmark over the example database.
pub fn example_queries() -> Vec<QuerySpec> {
    QUERIES
        .iter()
        .map(|q| QuerySpec {
            id: q.id.to_string(),
            database_name: EXAMPLE_DATABASE_NAME.to_string(),
            original_text: q.original.to_string(),
            term_disambiguated_text: Some(q.disambiguated.to_string()),
            output_schema_clause: Some(q.output_clause.to_string()),
            gold_sql: q.gold.to_string(),
            gold_fix_notes: q.fix_note.map(str::to_string),
        })
        .collect()
}

/// Full documentation set: human entries plus the benchmark queries.
pub fn example_docset() -> DocSet {
    DocSet {
        database_name: EXAMPLE_DATABASE_NAME.to_string(),
        entries: example_entries(),
        queries: example_queries(),
    }
}
