//! Explicit-state text files: states (`.sta`), transitions (`.tra`), labels
//! (`.lab`), players (`.pla`) and strategies (`.str`).

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::game::StochasticGame;
use crate::ltlf::{Label, Proposition};
use crate::model::{Choice, GameGraph, Player};
use crate::product::ProductGame;
use crate::scalar::Scalar;
use crate::solver::Strategy;

pub const INIT_LABEL: &str = "init";
pub const TARGET_LABEL: &str = "target";
/// Largest tolerated deviation of a choice's probability mass from 1.
pub const SUM_TOLERANCE: f64 = 1e-6;

/// A malformed line in one of the explicit files. Lines are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{file}:{line}: {message}")]
pub struct FormatError {
    pub file: String,
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum ExplicitError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("model cannot be written: {0}")]
    Unrepresentable(String),
}

/// Contents of the four model files.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitFiles {
    pub sta: String,
    pub tra: String,
    pub lab: String,
    pub pla: String,
}

/// Paths of a written bundle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitBundle {
    pub sta: PathBuf,
    pub tra: PathBuf,
    pub lab: PathBuf,
    pub pla: PathBuf,
    pub str: Option<PathBuf>,
}

impl ExplicitBundle {
    pub fn in_dir(dir: &Path) -> Self {
        ExplicitBundle {
            sta: dir.join("model.sta"),
            tra: dir.join("model.tra"),
            lab: dir.join("model.lab"),
            pla: dir.join("model.pla"),
            str: None,
        }
    }
}

/// Anything that can be written in the explicit format.
pub trait ExplicitModel<T: Scalar> {
    fn graph(&self) -> &GameGraph<T>;
    fn variables(&self) -> &[String];
    fn valuations(&self) -> &[Vec<i64>];
    /// Label names following `init` in header order, and the per-state
    /// indices into that list.
    fn label_table(&self) -> Result<(Vec<String>, Vec<Vec<usize>>), ExplicitError>;
}

fn label_table(
    propositions: &BTreeSet<Proposition>,
    labels: &[Label],
    target: Option<&[bool]>,
) -> Result<(Vec<String>, Vec<Vec<usize>>), ExplicitError> {
    let has_target_prop = propositions.iter().any(|p| p.as_str() == TARGET_LABEL);
    if propositions.iter().any(|p| p.as_str() == INIT_LABEL) {
        return Err(ExplicitError::Unrepresentable(format!("proposition '{INIT_LABEL}' is reserved")));
    }
    if target.is_some() && has_target_prop {
        return Err(ExplicitError::Unrepresentable(format!(
            "proposition '{TARGET_LABEL}' clashes with the product target"
        )));
    }
    let mut names = Vec::with_capacity(propositions.len() + 1);
    if target.is_some() || has_target_prop {
        names.push(TARGET_LABEL.to_string());
    }
    names.extend(propositions.iter().map(|p| p.as_str()).filter(|p| *p != TARGET_LABEL).map(String::from));
    let position = |name: &str| names.iter().position(|n| n == name).expect("declared label");
    let per_state = labels
        .iter()
        .enumerate()
        .map(|(s, label)| {
            let mut ids: Vec<usize> = label.iter().map(|p| position(p.as_str())).collect();
            if target.is_some_and(|t| t[s]) {
                ids.push(0);
            }
            ids.sort_unstable();
            ids
        })
        .collect();
    Ok((names, per_state))
}

impl<T: Scalar> ExplicitModel<T> for StochasticGame<T> {
    fn graph(&self) -> &GameGraph<T> {
        &self.graph
    }
    fn variables(&self) -> &[String] {
        &self.variables
    }
    fn valuations(&self) -> &[Vec<i64>] {
        &self.valuations
    }
    fn label_table(&self) -> Result<(Vec<String>, Vec<Vec<usize>>), ExplicitError> {
        label_table(&self.propositions, &self.labels, None)
    }
}

impl<T: Scalar> ExplicitModel<T> for ProductGame<T> {
    fn graph(&self) -> &GameGraph<T> {
        &self.graph
    }
    fn variables(&self) -> &[String] {
        &self.variables
    }
    fn valuations(&self) -> &[Vec<i64>] {
        &self.valuations
    }
    fn label_table(&self) -> Result<(Vec<String>, Vec<Vec<usize>>), ExplicitError> {
        label_table(&self.propositions, &self.labels, Some(&self.target))
    }
}

fn check_token(what: &str, s: &str) -> Result<(), ExplicitError> {
    if s.is_empty() || s.chars().any(|c| c.is_whitespace() || c == '"' || c == ',' || c == '(' || c == ')') {
        return Err(ExplicitError::Unrepresentable(format!("{what} '{s}' is not a plain token")));
    }
    Ok(())
}

/// Renders the four files in memory.
pub fn render_explicit<T: Scalar, M: ExplicitModel<T> + ?Sized>(model: &M) -> Result<ExplicitFiles, ExplicitError> {
    let graph = model.graph();
    let n = graph.num_states();
    for v in model.variables() {
        check_token("variable", v)?;
    }

    let mut sta = format!("({})\n", model.variables().join(","));
    for (s, vals) in model.valuations().iter().enumerate() {
        let vals: Vec<String> = vals.iter().map(i64::to_string).collect();
        let _ = writeln!(sta, "{s}:({})", vals.join(","));
    }

    let mut tra = format!("{} {} {}\n", n, graph.num_choices(), graph.num_transitions());
    for (s, choices) in graph.choices.iter().enumerate() {
        for (c, choice) in choices.iter().enumerate() {
            check_token("action", &choice.action)?;
            for &(t, p) in &choice.transitions {
                let _ = writeln!(tra, "{s} {c} {t} {p} {}", choice.action);
            }
        }
    }

    let (names, per_state) = model.label_table()?;
    let mut lab = format!("0=\"{INIT_LABEL}\"");
    for (i, name) in names.iter().enumerate() {
        let _ = write!(lab, " {}=\"{name}\"", i + 1);
    }
    lab.push('\n');
    for (s, ids) in per_state.iter().enumerate() {
        let mut all: Vec<usize> = ids.iter().map(|i| i + 1).collect();
        if s == graph.initial {
            all.insert(0, 0);
        }
        if !all.is_empty() {
            let ids: Vec<String> = all.iter().map(usize::to_string).collect();
            let _ = writeln!(lab, "{s}: {}", ids.join(" "));
        }
    }

    let mut pla = String::new();
    for (s, p) in graph.player.iter().enumerate() {
        let _ = writeln!(pla, "{s} {}", p.id());
    }
    Ok(ExplicitFiles { sta, tra, lab, pla })
}

fn write_file(path: &Path, contents: &str) -> Result<(), ExplicitError> {
    fs::write(path, contents).map_err(|source| ExplicitError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_file(path: &Path) -> Result<String, ExplicitError> {
    fs::read_to_string(path).map_err(|source| ExplicitError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `model.sta`, `model.tra`, `model.lab` and `model.pla` into `dir`.
pub fn export_explicit<T: Scalar, M: ExplicitModel<T> + ?Sized>(
    model: &M,
    dir: &Path,
) -> Result<ExplicitBundle, ExplicitError> {
    let files = render_explicit(model)?;
    fs::create_dir_all(dir).map_err(|source| ExplicitError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let bundle = ExplicitBundle::in_dir(dir);
    write_file(&bundle.sta, &files.sta)?;
    write_file(&bundle.tra, &files.tra)?;
    write_file(&bundle.lab, &files.lab)?;
    write_file(&bundle.pla, &files.pla)?;
    Ok(bundle)
}

/// Reads the four files from `dir`.
pub fn import_explicit<T: Scalar>(dir: &Path) -> Result<StochasticGame<T>, ExplicitError> {
    let bundle = ExplicitBundle::in_dir(dir);
    let files = ExplicitFiles {
        sta: read_file(&bundle.sta)?,
        tra: read_file(&bundle.tra)?,
        lab: read_file(&bundle.lab)?,
        pla: read_file(&bundle.pla)?,
    };
    Ok(parse_explicit(&files)?)
}

struct Reader<'a> {
    file: &'static str,
    lines: Vec<&'a str>,
}

impl<'a> Reader<'a> {
    fn new(file: &'static str, text: &'a str) -> Result<Self, FormatError> {
        let lines: Vec<&str> = text.split('\n').collect();
        let Some((last, body)) = lines.split_last() else {
            unreachable!("split yields at least one piece")
        };
        if !last.is_empty() {
            return Err(FormatError {
                file: file.into(),
                line: lines.len(),
                message: "file must end with a newline".into(),
            });
        }
        Ok(Reader {
            file,
            lines: body.to_vec(),
        })
    }

    fn err(&self, line: usize, message: impl Into<String>) -> FormatError {
        FormatError {
            file: self.file.into(),
            line,
            message: message.into(),
        }
    }

    fn header(&self) -> Result<&'a str, FormatError> {
        self.lines.first().copied().ok_or_else(|| self.err(1, "missing header"))
    }

    /// Body lines with their 1-based line numbers.
    fn body(&self, skip_header: bool) -> impl Iterator<Item = (usize, &'a str)> + '_ {
        let skip = usize::from(skip_header);
        self.lines.iter().enumerate().skip(skip).map(|(i, l)| (i + 1, *l))
    }
}

fn parse_index(r: &Reader, line: usize, token: &str, what: &str) -> Result<usize, FormatError> {
    token
        .parse::<usize>()
        .map_err(|_| r.err(line, format!("expected {what}, found '{token}'")))
}

/// Parses in-memory file contents into a game.
pub fn parse_explicit<T: Scalar>(files: &ExplicitFiles) -> Result<StochasticGame<T>, FormatError> {
    // Transitions first: the header fixes the state count.
    let tra = Reader::new("model.tra", &files.tra)?;
    let header: Vec<&str> = tra.header()?.split(' ').collect();
    if header.len() != 3 {
        return Err(tra.err(1, "header must be 'numStates numChoices numTransitions'"));
    }
    let n = parse_index(&tra, 1, header[0], "state count")?;
    let num_choices = parse_index(&tra, 1, header[1], "choice count")?;
    let num_transitions = parse_index(&tra, 1, header[2], "transition count")?;
    if tra.lines.len() - 1 != num_transitions {
        return Err(tra.err(
            1,
            format!("header declares {num_transitions} transitions, body has {}", tra.lines.len() - 1),
        ));
    }
    let mut choices: Vec<Vec<Choice<T>>> = vec![Vec::new(); n];
    let mut first_line: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut last: Option<(usize, usize, usize)> = None;
    for (line, text) in tra.body(true) {
        let fields: Vec<&str> = text.split(' ').collect();
        if fields.len() != 5 {
            return Err(tra.err(line, "expected 'src choice dst prob action'"));
        }
        let src = parse_index(&tra, line, fields[0], "source state")?;
        let c = parse_index(&tra, line, fields[1], "choice index")?;
        let dst = parse_index(&tra, line, fields[2], "target state")?;
        if src >= n {
            return Err(tra.err(line, format!("source state {src} out of range")));
        }
        if dst >= n {
            return Err(tra.err(line, format!("target state {dst} out of range")));
        }
        let p: T = fields[3]
            .parse()
            .map_err(|_| tra.err(line, format!("invalid probability '{}'", fields[3])))?;
        if !(p > T::zero() && p <= T::one()) {
            return Err(tra.err(line, format!("probability {} outside (0, 1]", fields[3])));
        }
        let action = fields[4];
        if action.is_empty() {
            return Err(tra.err(line, "empty action name"));
        }
        if let Some(prev) = last {
            if (src, c, dst) <= prev {
                return Err(tra.err(line, "lines must be sorted by (src, choice, dst) without repeats"));
            }
        }
        last = Some((src, c, dst));
        let here = &mut choices[src];
        if c == here.len() {
            here.push(Choice {
                action: action.to_string(),
                transitions: Vec::new(),
            });
            first_line[src].push(line);
        } else if c + 1 != here.len() {
            return Err(tra.err(line, format!("choice {c} of state {src} is not contiguous")));
        } else if here[c].action != action {
            return Err(tra.err(line, format!("choice {c} of state {src} changes action name")));
        }
        here[c].transitions.push((dst, p));
    }
    let declared: usize = choices.iter().map(Vec::len).sum();
    if declared != num_choices {
        return Err(tra.err(1, format!("header declares {num_choices} choices, body has {declared}")));
    }
    for (s, cs) in choices.iter().enumerate() {
        if cs.is_empty() {
            return Err(tra.err(1, format!("state {s} has no choices")));
        }
        for (c, choice) in cs.iter().enumerate() {
            let total = choice.total().as_f64();
            if (total - 1.0).abs() > SUM_TOLERANCE {
                return Err(tra.err(
                    first_line[s][c],
                    format!("choice ({s}, {c}) probabilities sum to {total}"),
                ));
            }
        }
    }

    let sta = Reader::new("model.sta", &files.sta)?;
    let head = sta.header()?;
    let inner = head
        .strip_prefix('(')
        .and_then(|h| h.strip_suffix(')'))
        .ok_or_else(|| sta.err(1, "header must be '(var1,var2,...)'"))?;
    let variables: Vec<String> = if inner.is_empty() {
        Vec::new()
    } else {
        inner.split(',').map(String::from).collect()
    };
    if variables.iter().any(|v| v.is_empty()) {
        return Err(sta.err(1, "empty variable name"));
    }
    if sta.lines.len() - 1 != n {
        return Err(sta.err(1, format!("expected {n} states, found {}", sta.lines.len() - 1)));
    }
    let mut valuations = Vec::with_capacity(n);
    for (line, text) in sta.body(true) {
        let s = line - 2;
        let rest = text
            .strip_prefix(&format!("{s}:("))
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| sta.err(line, format!("expected '{s}:(...)'")))?;
        let vals: Vec<i64> = if rest.is_empty() {
            Vec::new()
        } else {
            rest.split(',')
                .map(|v| v.parse::<i64>().map_err(|_| sta.err(line, format!("invalid value '{v}'"))))
                .collect::<Result<_, _>>()?
        };
        if vals.len() != variables.len() {
            return Err(sta.err(line, format!("expected {} values", variables.len())));
        }
        valuations.push(vals);
    }

    let lab = Reader::new("model.lab", &files.lab)?;
    let mut names = Vec::new();
    for (i, token) in lab.header()?.split(' ').enumerate() {
        let expected = format!("{i}=\"");
        let name = token
            .strip_prefix(&expected)
            .and_then(|t| t.strip_suffix('"'))
            .ok_or_else(|| lab.err(1, format!("expected {i}=\"name\", found '{token}'")))?;
        names.push(name.to_string());
    }
    if names.first().map(String::as_str) != Some(INIT_LABEL) {
        return Err(lab.err(1, format!("label 0 must be \"{INIT_LABEL}\"")));
    }
    let mut propositions = BTreeSet::new();
    let mut props_by_id = vec![None];
    for name in &names[1..] {
        let p = Proposition::new(name.clone()).map_err(|e| lab.err(1, e.to_string()))?;
        if !propositions.insert(p.clone()) || name == INIT_LABEL {
            return Err(lab.err(1, format!("duplicate label '{name}'")));
        }
        props_by_id.push(Some(p));
    }
    let mut labels = vec![Label::empty(); n];
    let mut initial = None;
    let mut previous: Option<usize> = None;
    for (line, text) in lab.body(true) {
        let (state, ids) = text.split_once(": ").ok_or_else(|| lab.err(line, "expected 'state: id id ...'"))?;
        let s = parse_index(&lab, line, state, "state index")?;
        if s >= n {
            return Err(lab.err(line, format!("state {s} out of range")));
        }
        if previous.is_some_and(|p| p >= s) {
            return Err(lab.err(line, "states must be listed in increasing order"));
        }
        previous = Some(s);
        let mut last_id = None;
        for token in ids.split(' ') {
            let id = parse_index(&lab, line, token, "label id")?;
            if id >= names.len() {
                return Err(lab.err(line, format!("unknown label id {id}")));
            }
            if last_id.is_some_and(|l| l >= id) {
                return Err(lab.err(line, "label ids must be increasing"));
            }
            last_id = Some(id);
            match &props_by_id[id] {
                None => {
                    if initial.replace(s).is_some() {
                        return Err(lab.err(line, "more than one initial state"));
                    }
                }
                Some(p) => labels[s].insert(p.clone()),
            }
        }
    }
    let initial = initial.ok_or_else(|| lab.err(1, "no state carries the init label"))?;

    let pla = Reader::new("model.pla", &files.pla)?;
    if pla.lines.len() != n {
        return Err(pla.err(pla.lines.len().max(1), format!("expected {n} player lines")));
    }
    let mut player = Vec::with_capacity(n);
    for (line, text) in pla.body(false) {
        let s = line - 1;
        let id = text
            .strip_prefix(&format!("{s} "))
            .ok_or_else(|| pla.err(line, format!("expected '{s} player'")))?;
        let p = id
            .parse::<u8>()
            .ok()
            .and_then(Player::from_id)
            .ok_or_else(|| pla.err(line, format!("invalid player '{id}'")))?;
        player.push(p);
    }

    Ok(StochasticGame {
        graph: GameGraph {
            player,
            choices,
            initial,
        },
        variables,
        valuations,
        labels,
        propositions,
    })
}

/// Renders `model.str`: one `idx actionName` line per state that has a choice.
pub fn render_strategy<T: Scalar>(graph: &GameGraph<T>, strat: &Strategy) -> String {
    let mut out = String::new();
    for s in 0..graph.num_states() {
        if let Some(c) = strat.choice(s, graph.player[s]) {
            let _ = writeln!(out, "{s} {}", graph.choices[s][c].action);
        }
    }
    out
}

pub fn write_strategy<T: Scalar>(graph: &GameGraph<T>, strat: &Strategy, path: &Path) -> Result<(), ExplicitError> {
    write_file(path, &render_strategy(graph, strat))
}

/// Parses a strategy file against the game it was written for.
pub fn parse_strategy<T: Scalar>(graph: &GameGraph<T>, text: &str) -> Result<Strategy, FormatError> {
    let r = Reader::new("model.str", text)?;
    let n = graph.num_states();
    let mut strat = Strategy {
        robot_choice: vec![None; n],
        human_choice: vec![None; n],
    };
    for (line, text) in r.body(false) {
        let (state, action) = text.split_once(' ').ok_or_else(|| r.err(line, "expected 'state action'"))?;
        let s = parse_index(&r, line, state, "state index")?;
        if s >= n {
            return Err(r.err(line, format!("state {s} out of range")));
        }
        let c = graph.choices[s]
            .iter()
            .position(|c| c.action == action)
            .ok_or_else(|| r.err(line, format!("state {s} has no action '{action}'")))?;
        match graph.player[s] {
            Player::Robot => strat.robot_choice[s] = Some(c),
            Player::Human => strat.human_choice[s] = Some(c),
        }
    }
    Ok(strat)
}

pub fn read_strategy<T: Scalar>(graph: &GameGraph<T>, path: &Path) -> Result<Strategy, ExplicitError> {
    Ok(parse_strategy(graph, &read_file(path)?)?)
}
