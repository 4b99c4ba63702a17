use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    Sched,
    Tx,
    Outcome,
    State,
}

impl TraceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::Sched => "sched",
            TraceKind::Tx => "tx",
            TraceKind::Outcome => "outcome",
            TraceKind::State => "state",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub slot: usize,
    pub kind: TraceKind,
    pub fields: Vec<(&'static str, String)>,
}

impl TraceRecord {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|f| f.0 == key).map(|f| f.1.as_str())
    }
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "slot={} kind={}", self.slot, self.kind.as_str())?;
        for (k, v) in &self.fields {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimTrace {
    pub records: Vec<TraceRecord>,
}

impl SimTrace {
    pub(crate) fn push(&mut self, slot: usize, kind: TraceKind, fields: Vec<(&'static str, String)>) {
        self.records.push(TraceRecord { slot, kind, fields });
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            s.push_str(&r.to_string());
            s.push('\n');
        }
        s
    }

    pub fn of_kind(&self, kind: TraceKind) -> impl Iterator<Item = &TraceRecord> {
        self.records.iter().filter(move |r| r.kind == kind)
    }
}
