//! Structured run events, one text line each.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventKind {
    Move,
    Sense,
    MapDelta,
    Replan,
    SymbolSelected,
    GoalReached,
    Waiting,
    Transition,
    AcceptingEdge,
    EdgeRemoved,
    MissionInfeasible,
    SafetyViolation,
    Message,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Move => "move",
            EventKind::Sense => "sense",
            EventKind::MapDelta => "map-delta",
            EventKind::Replan => "replan",
            EventKind::SymbolSelected => "symbol-selected",
            EventKind::GoalReached => "goal-reached",
            EventKind::Waiting => "waiting",
            EventKind::Transition => "transition",
            EventKind::AcceptingEdge => "accepting-edge",
            EventKind::EdgeRemoved => "edge-removed",
            EventKind::MissionInfeasible => "mission-infeasible",
            EventKind::SafetyViolation => "safety-violation",
            EventKind::Message => "message",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        ALL.iter().copied().find(|k| k.as_str() == s)
    }
}

const ALL: [EventKind; 13] = [
    EventKind::Move,
    EventKind::Sense,
    EventKind::MapDelta,
    EventKind::Replan,
    EventKind::SymbolSelected,
    EventKind::GoalReached,
    EventKind::Waiting,
    EventKind::Transition,
    EventKind::AcceptingEdge,
    EventKind::EdgeRemoved,
    EventKind::MissionInfeasible,
    EventKind::SafetyViolation,
    EventKind::Message,
];

/// `tick=<t> kind=<kind> key=value ...`. Values never contain spaces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub tick: u64,
    pub kind: EventKind,
    pub fields: Vec<(&'static str, String)>,
}

impl TraceEvent {
    pub fn new(tick: u64, kind: EventKind) -> Self {
        TraceEvent { tick, kind, fields: Vec::new() }
    }

    pub fn with(mut self, key: &'static str, value: impl fmt::Display) -> Self {
        let v = value.to_string().replace(' ', "");
        self.fields.push((key, v));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| *k == key).map(|(_, v)| v.as_str())
    }
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tick={} kind={}", self.tick, self.kind.as_str())?;
        for (k, v) in &self.fields {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

/// The whole trace, newline terminated.
pub fn render(events: &[TraceEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&e.to_string());
        out.push('\n');
    }
    out
}
