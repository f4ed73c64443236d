//! Independent oracles shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use std::collections::HashMap;

use hrgame::ltlf::{Formula, Label, Trace};
use hrgame::model::Player;
use hrgame::ProductGame;
use hrgame::solver::Objective;
use nalgebra::{DMatrix, DVector};

/// Formulas over `p`, `q`, `r` exercising every operator.
pub fn formula_pool() -> Vec<&'static str> {
    vec![
        "true",
        "false",
        "p",
        "!p",
        "F p",
        "G p",
        "X p",
        "N p",
        "p U q",
        "p R q",
        "!X p",
        "!N p",
        "F (p & X q)",
        "G (p -> F q)",
        "F G p",
        "G F p",
        "(p U q) U r",
        "p U (q R r)",
        "!(p U q) | X r",
        "F (p & q & r) & G (!(p & q) -> !r)",
        "X X p",
        "N N p",
        "X N p",
        "G (p -> X q)",
        "F p & F q & F r",
        "(p R q) & (q U r)",
        "p -> N false",
        "G (q | N false)",
    ]
}

pub fn letters(props: &[&str]) -> Vec<Label> {
    (0..1usize << props.len())
        .map(|bits| (0..props.len()).filter(|i| bits >> i & 1 == 1).map(|i| props[i]).collect::<Vec<_>>())
        .map(|names| Label::of(&names))
        .collect()
}

/// Every trace of length `1..=max_len` over `letters`.
pub fn all_traces(letters: &[Label], max_len: usize) -> Vec<Trace> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<Label>> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * letters.len());
        for prefix in &layer {
            for l in letters {
                let mut t = prefix.clone();
                t.push(l.clone());
                next.push(t);
            }
        }
        out.extend(next.iter().cloned().map(|t| Trace::new(t).unwrap()));
        layer = next;
    }
    out
}

/// A deliberately naive recursive evaluator written straight from the
/// finite-trace semantics, independent of the library's.
pub fn naive_holds(f: &Formula, t: &[Label], i: usize) -> bool {
    let n = t.len();
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(p) => t[i].contains(p),
        Formula::Not(a) => !naive_holds(a, t, i),
        Formula::And(a, b) => naive_holds(a, t, i) && naive_holds(b, t, i),
        Formula::Or(a, b) => naive_holds(a, t, i) || naive_holds(b, t, i),
        Formula::Implies(a, b) => !naive_holds(a, t, i) || naive_holds(b, t, i),
        Formula::Next(a) => i + 1 < n && naive_holds(a, t, i + 1),
        Formula::WeakNext(a) => i + 1 == n || naive_holds(a, t, i + 1),
        Formula::Until(a, b) => (i..n).any(|j| naive_holds(b, t, j) && (i..j).all(|k| naive_holds(a, t, k))),
        Formula::Release(a, b) => (i..n).all(|j| naive_holds(b, t, j) || (i..j).any(|k| naive_holds(a, t, k))),
        Formula::Eventually(a) => (i..n).any(|j| naive_holds(a, t, j)),
        Formula::Globally(a) => (i..n).all(|j| naive_holds(a, t, j)),
    }
}

/// Reachability probabilities of the Markov chain obtained by fixing one
/// choice per state, by solving the linear system on states that can reach
/// the target.
pub fn chain_values(pg: &ProductGame, pick: &[usize]) -> Vec<f64> {
    let n = pg.num_states();
    let mut reach = pg.target.clone();
    loop {
        let mut changed = false;
        for s in 0..n {
            if !reach[s] && pg.choices(s)[pick[s]].support().any(|t| reach[t]) {
                reach[s] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let unknown: Vec<usize> = (0..n).filter(|&s| reach[s] && !pg.target[s]).collect();
    let pos: HashMap<usize, usize> = unknown.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let m = unknown.len();
    let mut a = DMatrix::<f64>::identity(m, m);
    let mut b = DVector::<f64>::zeros(m);
    for (i, &s) in unknown.iter().enumerate() {
        for &(t, p) in &pg.choices(s)[pick[s]].transitions {
            if pg.target[t] {
                b[i] += p;
            } else if let Some(&j) = pos.get(&t) {
                a[(i, j)] -= p;
            }
        }
    }
    let x = if m == 0 { DVector::zeros(0) } else { a.lu().solve(&b).expect("transient system is non-singular") };
    (0..n)
        .map(|s| if pg.target[s] { 1.0 } else { pos.get(&s).map_or(0.0, |&i| x[i]) })
        .collect()
}

fn profiles(pg: &ProductGame, states: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0usize; pg.num_states()]];
    for &s in states {
        let k = pg.choices(s).len();
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..k).map(move |c| {
                    let mut q = p.clone();
                    q[s] = c;
                    q
                })
            })
            .collect();
    }
    out
}

/// Game values by enumerating every pure memoryless strategy of both
/// players: pointwise max over maximizer strategies of the pointwise min over
/// minimizer responses.
pub fn brute_force_values(pg: &ProductGame, objective: Objective) -> Vec<f64> {
    let n = pg.num_states();
    let (max_states, min_states): (Vec<usize>, Vec<usize>) =
        (0..n).filter(|&s| pg.choices(s).len() > 1).partition(|&s| objective.maximizes(pg.player(s)));
    let mut best = vec![f64::NEG_INFINITY; n];
    for sigma in profiles(pg, &max_states) {
        let mut worst = vec![f64::INFINITY; n];
        let mut tau_profiles = profiles(pg, &min_states);
        for tau in tau_profiles.iter_mut() {
            for &s in &max_states {
                tau[s] = sigma[s];
            }
            let v = chain_values(pg, tau);
            for s in 0..n {
                worst[s] = worst[s].min(v[s]);
            }
        }
        for s in 0..n {
            best[s] = best[s].max(worst[s]);
        }
    }
    best
}

/// Independent tic-tac-toe rules: board cells 0 empty, 1 robot, 2 human.
pub mod ttt {
    pub const LINES: [[usize; 3]; 8] =
        [[0, 1, 2], [3, 4, 5], [6, 7, 8], [0, 3, 6], [1, 4, 7], [2, 5, 8], [0, 4, 8], [2, 4, 6]];

    pub fn winner(b: &[u8; 9]) -> u8 {
        for l in LINES {
            if b[l[0]] != 0 && b[l[0]] == b[l[1]] && b[l[1]] == b[l[2]] {
                return b[l[0]];
            }
        }
        0
    }

    /// Landing distribution of a marker aimed at `aim`.
    pub fn landing(b: &[u8; 9], aim: usize, sigma: f64) -> Vec<(usize, f64)> {
        if sigma == 0.0 {
            return vec![(aim, 1.0)];
        }
        let xy = |c: usize| ((c % 3) as f64, (c / 3) as f64);
        let d2 = |a: usize, c: usize| {
            let (ax, ay) = xy(a);
            let (cx, cy) = xy(c);
            (ax - cx) * (ax - cx) + (ay - cy) * (ay - cy)
        };
        let mut mass = [0.0; 9];
        for c in 0..9 {
            let w = (-d2(aim, c) / (2.0 * sigma * sigma)).exp();
            let dest = (0..9).filter(|&f| b[f] == 0).min_by(|&x, &y| d2(c, x).partial_cmp(&d2(c, y)).unwrap().then(x.cmp(&y))).unwrap();
            mass[dest] += w;
        }
        let total: f64 = mass.iter().sum();
        (0..9).filter(|&c| mass[c] > 0.0).map(|c| (c, mass[c] / total)).collect()
    }

    /// Expectiminimax value of reaching `goal`'s win: `robot_max` says whether
    /// the robot maximizes (the human then minimizes) or the reverse.
    pub fn value(
        b: [u8; 9],
        robot_turn: bool,
        sigma: f64,
        goal: u8,
        robot_max: bool,
        memo: &mut std::collections::HashMap<([u8; 9], bool), f64>,
    ) -> f64 {
        let w = winner(&b);
        if w != 0 {
            return if w == goal { 1.0 } else { 0.0 };
        }
        if b.iter().all(|&c| c != 0) {
            return 0.0;
        }
        if let Some(&v) = memo.get(&(b, robot_turn)) {
            return v;
        }
        let mark = if robot_turn { 1 } else { 2 };
        let maximize = robot_turn == robot_max;
        let mut best: Option<f64> = None;
        for aim in (0..9).filter(|&c| b[c] == 0) {
            let mut v = 0.0;
            for (c, p) in landing(&b, aim, sigma) {
                let mut nb = b;
                nb[c] = mark;
                v += p * value(nb, !robot_turn, sigma, goal, robot_max, memo);
            }
            best = Some(match best {
                None => v,
                Some(x) if maximize => x.max(v),
                Some(x) => x.min(v),
            });
        }
        let v = best.unwrap();
        memo.insert((b, robot_turn), v);
        v
    }

    /// Plain minimax over the full tree (no trembling), win = 1.
    pub fn minimax(b: [u8; 9], robot_turn: bool, goal: u8, robot_max: bool) -> f64 {
        let w = winner(&b);
        if w != 0 {
            return if w == goal { 1.0 } else { 0.0 };
        }
        let free: Vec<usize> = (0..9).filter(|&c| b[c] == 0).collect();
        if free.is_empty() {
            return 0.0;
        }
        let vals = free.iter().map(|&c| {
            let mut nb = b;
            nb[c] = if robot_turn { 1 } else { 2 };
            minimax(nb, !robot_turn, goal, robot_max)
        });
        if robot_turn == robot_max {
            vals.fold(0.0, f64::max)
        } else {
            vals.fold(1.0, f64::min)
        }
    }
}

pub fn player_name(p: Player) -> &'static str {
    match p {
        Player::Robot => "robot",
        Player::Human => "human",
    }
}

/// The tiny reference game: s0 robot, `a` reaches the target with 0.9 and s1
/// with 0.1; s1 human, `back` to s0 or `quit` to the sink.
pub fn tiny() -> ProductGame {
    use hrgame::model::{Choice, GameGraph};
    let graph = GameGraph {
        player: vec![Player::Robot, Player::Human, Player::Robot, Player::Robot],
        choices: vec![
            vec![Choice::new("a", vec![(2, 0.9), (1, 0.1)])],
            vec![Choice::new("back", vec![(0, 1.0)]), Choice::new("quit", vec![(3, 1.0)])],
            vec![Choice::self_loop("stay", 2)],
            vec![Choice::self_loop("stay", 3)],
        ],
        initial: 0,
    };
    ProductGame::from_graph(graph, vec![false, false, true, false])
}

pub fn golden_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/tiny")
}

pub fn scenarios_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

/// One malformed bundle: which file was broken and the line the error must name.
pub struct Fault {
    pub name: &'static str,
    pub files: hrgame::explicit::ExplicitFiles,
    pub file: &'static str,
    pub line: usize,
}

/// Ten single-defect variants of the tiny game's files.
pub fn fault_corpus() -> Vec<Fault> {
    let base = hrgame::explicit::render_explicit(&tiny()).expect("tiny renders");
    let edit = |f: fn(&mut hrgame::explicit::ExplicitFiles)| {
        let mut files = base.clone();
        f(&mut files);
        files
    };
    vec![
        Fault { name: "transition count too high", files: edit(|f| f.tra = f.tra.replacen("4 5 6", "4 5 7", 1)), file: "model.tra", line: 1 },
        Fault { name: "sub-stochastic choice", files: edit(|f| f.tra = f.tra.replace("0 0 2 0.9 a", "0 0 2 0.4 a")), file: "model.tra", line: 2 },
        Fault { name: "dangling successor", files: edit(|f| f.tra = f.tra.replace("1 1 3 1 quit", "1 1 9 1 quit")), file: "model.tra", line: 5 },
        Fault { name: "probability not a number", files: edit(|f| f.tra = f.tra.replace("1 0 0 1 back", "1 0 0 one back")), file: "model.tra", line: 4 },
        Fault { name: "unclosed valuation", files: edit(|f| f.sta = f.sta.replace("2:(2)", "2:(2")), file: "model.sta", line: 4 },
        Fault { name: "variable header without parentheses", files: edit(|f| f.sta = f.sta.replacen("(s)", "s", 1)), file: "model.sta", line: 1 },
        Fault { name: "undeclared label id", files: edit(|f| f.lab = f.lab.replace("2: 1", "2: 7")), file: "model.lab", line: 3 },
        Fault { name: "label header unquoted", files: edit(|f| f.lab = f.lab.replacen("1=\"target\"", "1=target", 1)), file: "model.lab", line: 1 },
        Fault { name: "unknown player", files: edit(|f| f.pla = f.pla.replace("1 2", "1 3")), file: "model.pla", line: 2 },
        Fault { name: "players out of order", files: edit(|f| f.pla = f.pla.replace("2 1\n3 1", "3 1\n2 1")), file: "model.pla", line: 3 },
    ]
}
