//! ORDER expressions to deterministic automata: Thompson construction to an
//! epsilon-NFA, then subset construction. The DFA is partial; a missing
//! transition means the call is not allowed in that state.

use indexmap::IndexMap;
use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use super::OrderExpr;

pub type StateId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automaton {
    state_count: usize,
    initial: StateId,
    accepting: BTreeSet<StateId>,
    transitions: BTreeMap<(StateId, String), StateId>,
}

impl Automaton {
    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn state_count(&self) -> usize {
        self.state_count
    }

    pub fn is_accepting(&self, state: StateId) -> bool {
        self.accepting.contains(&state)
    }

    pub fn next(&self, state: StateId, label: &str) -> Option<StateId> {
        // BTreeMap lookups need an owned key; the alphabet is tiny.
        self.transitions.get(&(state, label.to_string())).copied()
    }

    /// Labels with a transition out of `state`, sorted.
    pub fn expected(&self, state: StateId) -> Vec<&str> {
        self.transitions
            .range((state, String::new())..)
            .take_while(|((s, _), _)| *s == state)
            .map(|((_, l), _)| l.as_str())
            .collect()
    }

    pub fn accepts<'a>(&self, labels: impl IntoIterator<Item = &'a str>) -> bool {
        let mut state = self.initial;
        for label in labels {
            match self.next(state, label) {
                Some(s) => state = s,
                None => return false,
            }
        }
        self.is_accepting(state)
    }
}

#[derive(Default)]
struct Nfa {
    eps: Vec<Vec<usize>>,
    edges: Vec<Vec<(String, usize)>>,
}

impl Nfa {
    fn state(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.edges.push(Vec::new());
        self.eps.len() - 1
    }

    fn eps(&mut self, from: usize, to: usize) {
        self.eps[from].push(to);
    }

    /// Builds a fragment for `expr`, returning its (entry, exit) states.
    fn fragment(
        &mut self,
        expr: &OrderExpr,
        aliases: &IndexMap<String, Vec<String>>,
        expanding: &mut HashSet<String>,
    ) -> (usize, usize) {
        match expr {
            OrderExpr::Atom(name) => {
                let (s, e) = (self.state(), self.state());
                if let Some(members) = aliases.get(name) {
                    if expanding.insert(name.clone()) {
                        for m in members {
                            let (ms, me) =
                                self.fragment(&OrderExpr::Atom(m.clone()), aliases, expanding);
                            self.eps(s, ms);
                            self.eps(me, e);
                        }
                        expanding.remove(name);
                    }
                } else {
                    self.edges[s].push((name.clone(), e));
                }
                (s, e)
            }
            OrderExpr::Seq(items) => {
                let s = self.state();
                let mut cur = s;
                for item in items {
                    let (is, ie) = self.fragment(item, aliases, expanding);
                    self.eps(cur, is);
                    cur = ie;
                }
                (s, cur)
            }
            OrderExpr::Alt(items) => {
                let (s, e) = (self.state(), self.state());
                for item in items {
                    let (is, ie) = self.fragment(item, aliases, expanding);
                    self.eps(s, is);
                    self.eps(ie, e);
                }
                (s, e)
            }
            OrderExpr::Opt(inner) => {
                let (is, ie) = self.fragment(inner, aliases, expanding);
                self.eps(is, ie);
                (is, ie)
            }
            OrderExpr::Star(inner) => {
                let (s, e) = (self.state(), self.state());
                let (is, ie) = self.fragment(inner, aliases, expanding);
                self.eps(s, is);
                self.eps(s, e);
                self.eps(ie, is);
                self.eps(ie, e);
                (s, e)
            }
            OrderExpr::Plus(inner) => {
                let (s, e) = (self.state(), self.state());
                let (is, ie) = self.fragment(inner, aliases, expanding);
                self.eps(s, is);
                self.eps(ie, is);
                self.eps(ie, e);
                (s, e)
            }
        }
    }

    fn closure(&self, seeds: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
        let mut set = BTreeSet::new();
        let mut stack: Vec<usize> = seeds.into_iter().collect();
        while let Some(s) = stack.pop() {
            if set.insert(s) {
                stack.extend(self.eps[s].iter().copied());
            }
        }
        set
    }
}

/// Deterministic automaton for the language of `order`, with every alias
/// replaced by the alternation of its members.
pub fn build_automaton(order: &OrderExpr, aliases: &IndexMap<String, Vec<String>>) -> Automaton {
    let mut nfa = Nfa::default();
    let (start, accept) = nfa.fragment(order, aliases, &mut HashSet::new());

    let mut ids: BTreeMap<BTreeSet<usize>, StateId> = BTreeMap::new();
    let mut queue = VecDeque::new();
    let mut transitions = BTreeMap::new();
    let mut accepting = BTreeSet::new();

    let first = nfa.closure([start]);
    ids.insert(first.clone(), 0);
    queue.push_back(first);
    while let Some(set) = queue.pop_front() {
        let id = ids[&set];
        if set.contains(&accept) {
            accepting.insert(id);
        }
        let mut moves: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for &s in &set {
            for (label, to) in &nfa.edges[s] {
                moves.entry(label.as_str()).or_default().push(*to);
            }
        }
        for (label, targets) in moves {
            let next = nfa.closure(targets);
            let next_id = match ids.get(&next) {
                Some(&n) => n,
                None => {
                    let n = ids.len();
                    ids.insert(next.clone(), n);
                    queue.push_back(next);
                    n
                }
            };
            transitions.insert((id, label.to_string()), next_id);
        }
    }

    Automaton {
        state_count: ids.len(),
        initial: 0,
        accepting,
        transitions,
    }
}
