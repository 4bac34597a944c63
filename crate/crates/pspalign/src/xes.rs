//! XES reading and writing, plus a one-trace-per-line text format.
//!
//! Only the `concept:name` of each event is read.

use std::fmt::Write as _;
use std::path::Path;

use pspalign_core::log::{LogBuilder, LogError};
use pspalign_core::{Alphabet, EventLog};
use quick_xml::events::Event;
use quick_xml::Reader;

#[derive(Debug, thiserror::Error)]
pub enum XesError {
    #[error("line {line}: {message}")]
    Xml { line: usize, message: String },
    #[error("trace {trace}: event {event} has no concept:name")]
    MissingName { trace: usize, event: usize },
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn line_of(bytes: &[u8], offset: u64) -> usize {
    let end = (offset as usize).min(bytes.len());
    bytes[..end].iter().filter(|&&b| b == b'\n').count() + 1
}

pub fn parse_xes(bytes: &[u8], alphabet: &mut Alphabet) -> Result<EventLog, XesError> {
    let mut reader = Reader::from_reader(bytes);
    let mut buf = Vec::new();
    let mut log = LogBuilder::new();
    let mut trace: Option<Vec<_>> = None;
    let mut trace_no = 0usize;
    // Name of the event being read, if inside one.
    let mut event: Option<Option<String>> = None;
    let mut depth_in_event = 0usize;
    loop {
        let pos = reader.buffer_position();
        let ev = reader
            .read_event_into(&mut buf)
            .map_err(|e| XesError::Xml { line: line_of(bytes, pos), message: e.to_string() })?;
        match ev {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let empty = matches!(ev, Event::Empty(_));
                match e.local_name().as_ref() {
                    b"trace" if event.is_none() => {
                        if !empty {
                            trace = Some(Vec::new());
                        } else {
                            log.push(Vec::new())?;
                            trace_no += 1;
                        }
                    }
                    b"event" if trace.is_some() && event.is_none() => {
                        if empty {
                            let n = trace.as_ref().map_or(0, Vec::len);
                            return Err(XesError::MissingName { trace: trace_no, event: n });
                        }
                        event = Some(None);
                        depth_in_event = 0;
                    }
                    _ if event.is_some() => {
                        if depth_in_event == 0 {
                            let mut key = None;
                            let mut value = None;
                            for a in e.attributes().flatten() {
                                let v = a.unescape_value().map_err(|err| XesError::Xml {
                                    line: line_of(bytes, pos),
                                    message: err.to_string(),
                                })?;
                                match a.key.as_ref() {
                                    b"key" => key = Some(v.into_owned()),
                                    b"value" => value = Some(v.into_owned()),
                                    _ => {}
                                }
                            }
                            if key.as_deref() == Some("concept:name") {
                                if let Some(slot) = event.as_mut() {
                                    *slot = value;
                                }
                            }
                        }
                        if !empty {
                            depth_in_event += 1;
                        }
                    }
                    _ => {}
                }
            }
            Event::End(ref e) => match e.local_name().as_ref() {
                b"event" if event.is_some() && depth_in_event == 0 => {
                    let n = trace.as_ref().map_or(0, Vec::len);
                    let name = event.take().flatten().ok_or(XesError::MissingName { trace: trace_no, event: n })?;
                    if let Some(t) = trace.as_mut() {
                        t.push(alphabet.intern(&name));
                    }
                }
                b"trace" if event.is_none() => {
                    if let Some(t) = trace.take() {
                        log.push(t)?;
                        trace_no += 1;
                    }
                }
                _ if event.is_some() => depth_in_event = depth_in_event.saturating_sub(1),
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    Ok(log.finish())
}

/// One trace per line, labels separated by commas. Blank lines and lines
/// starting with `#` are skipped.
pub fn parse_plain(text: &str, alphabet: &mut Alphabet) -> Result<EventLog, XesError> {
    let mut log = LogBuilder::new();
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        log.push(line.split(',').map(|l| alphabet.intern(l.trim())).collect())?;
    }
    Ok(log.finish())
}

/// XES if the content starts with `<`, the text format otherwise.
pub fn read_log(path: &Path, alphabet: &mut Alphabet) -> Result<EventLog, XesError> {
    let bytes = std::fs::read(path).map_err(|source| XesError::Io { path: path.display().to_string(), source })?;
    let head = bytes.iter().find(|b| !b.is_ascii_whitespace());
    if head == Some(&b'<') {
        parse_xes(&bytes, alphabet)
    } else {
        parse_plain(&String::from_utf8_lossy(&bytes), alphabet)
    }
}

fn escape(s: &str) -> std::borrow::Cow<'_, str> {
    quick_xml::escape::escape(s)
}

/// Writes every distinct trace as many times as its frequency.
pub fn write_xes(log: &EventLog, alphabet: &Alphabet) -> String {
    let mut s = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<log xes.version=\"1.0\">\n");
    s.push_str(
        "  <extension name=\"Concept\" prefix=\"concept\" uri=\"http://www.xes-standard.org/concept.xesext\"/>\n",
    );
    let mut case = 0usize;
    for t in log.traces() {
        for _ in 0..t.frequency {
            case += 1;
            let _ = writeln!(s, "  <trace>\n    <string key=\"concept:name\" value=\"case{case}\"/>");
            for &l in &t.labels {
                let _ = writeln!(
                    s,
                    "    <event><string key=\"concept:name\" value=\"{}\"/></event>",
                    escape(alphabet.name(l))
                );
            }
            s.push_str("  </trace>\n");
        }
    }
    s.push_str("</log>\n");
    s
}
