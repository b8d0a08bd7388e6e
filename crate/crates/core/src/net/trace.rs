//! Line-oriented run trace: `time kind node key=value ...`.

use std::fmt;
use std::io::{self, Write};

use crate::sim::SimTime;

use super::NodeId;

#[derive(Default)]
pub struct Trace {
    out: Option<Box<dyn Write>>,
    error: Option<io::Error>,
    lines: u64,
}

impl fmt::Debug for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Trace")
            .field("enabled", &self.out.is_some())
            .field("lines", &self.lines)
            .finish()
    }
}

impl Trace {
    pub fn disabled() -> Self {
        Self::default()
    }

    pub fn to_writer<W: Write + 'static>(w: W) -> Self {
        Self {
            out: Some(Box::new(w)),
            error: None,
            lines: 0,
        }
    }

    #[inline]
    pub fn enabled(&self) -> bool {
        self.out.is_some()
    }

    pub fn lines(&self) -> u64 {
        self.lines
    }

    /// Writes one record. The first I/O error is kept and later writes are skipped.
    pub fn record(
        &mut self,
        time: SimTime,
        kind: &str,
        node: Option<NodeId>,
        fields: fmt::Arguments<'_>,
    ) {
        if self.error.is_some() {
            return;
        }
        let Some(out) = self.out.as_mut() else {
            return;
        };
        let res = match node {
            Some(n) => writeln!(out, "{time:.6} {kind} {n} {fields}"),
            None => writeln!(out, "{time:.6} {kind} - {fields}"),
        };
        match res {
            Ok(()) => self.lines += 1,
            Err(e) => self.error = Some(e),
        }
    }

    /// Flushes the sink and reports any error seen while writing.
    pub fn finish(&mut self) -> io::Result<()> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        if let Some(out) = self.out.as_mut() {
            out.flush()?;
        }
        Ok(())
    }
}

/// Emits a trace record only when tracing is on, so arguments are not formatted otherwise.
#[macro_export]
macro_rules! trace_event {
    ($trace:expr, $time:expr, $kind:expr, $node:expr, $($arg:tt)*) => {
        if $trace.enabled() {
            $trace.record($time, $kind, $node, format_args!($($arg)*));
        }
    };
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::RefCell;
    use std::rc::Rc;

    #[derive(Clone, Default)]
    struct Shared(Rc<RefCell<Vec<u8>>>);

    impl Write for Shared {
        fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
            self.0.borrow_mut().extend_from_slice(buf);
            Ok(buf.len())
        }
        fn flush(&mut self) -> io::Result<()> {
            Ok(())
        }
    }

    #[test]
    fn record_format() {
        let buf = Shared::default();
        let mut t = Trace::to_writer(buf.clone());
        trace_event!(t, 1.5, "tx", Some(3), "dst={} bits={}", 4, 160);
        trace_event!(t, 2.0, "relocate", None, "x={:.3}", 1.0);
        t.finish().unwrap();
        let text = String::from_utf8(buf.0.borrow().clone()).unwrap();
        assert_eq!(
            text,
            "1.500000 tx 3 dst=4 bits=160\n2.000000 relocate - x=1.000\n"
        );
        assert_eq!(t.lines(), 2);
    }

    #[test]
    fn disabled_trace_writes_nothing() {
        let mut t = Trace::disabled();
        trace_event!(t, 0.0, "tx", Some(0), "x");
        assert_eq!(t.lines(), 0);
        assert!(t.finish().is_ok());
    }
}
