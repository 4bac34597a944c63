//! PNML reading and writing for 1-safe nets.
//!
//! A transition is silent if it has no name, an empty name, a name in
//! {`tau`, `τ`, `invisible`}, or a `toolspecific` element marking it
//! invisible (ProM writes `activity="$invisible$"`).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use pspalign_core::marking::Marking;
use pspalign_core::{Alphabet, LabelId, NetBuilder, SystemNet};
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

#[derive(Debug, thiserror::Error)]
pub enum PnmlError {
    #[error("line {line}: {message}")]
    Xml { line: usize, message: String },
    #[error("arc {arc} refers to unknown node {node}")]
    UnknownNode { arc: String, node: String },
    #[error("arc {arc} connects two nodes of the same kind")]
    BadArc { arc: String },
    #[error("place {place} holds {tokens} tokens; only safe nets are supported")]
    NotSafe { place: String, tokens: u32 },
    #[error("no initial marking and no unique source place")]
    NoInitialMarking,
    #[error("no final marking and no unique sink place")]
    NoFinalMarking,
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Default)]
struct RawNode {
    id: String,
    name: Option<String>,
    tokens: u32,
    invisible: bool,
}

fn attr(e: &BytesStart<'_>, key: &[u8]) -> Option<String> {
    e.attributes()
        .flatten()
        .find(|a| a.key.as_ref() == key)
        .and_then(|a| a.unescape_value().ok().map(|v| v.into_owned()))
}

fn line_of(bytes: &[u8], offset: u64) -> usize {
    let end = (offset as usize).min(bytes.len());
    bytes[..end].iter().filter(|&&b| b == b'\n').count() + 1
}

fn is_silent_name(name: &str) -> bool {
    let n = name.trim();
    n.is_empty() || n.eq_ignore_ascii_case("tau") || n == "τ" || n.eq_ignore_ascii_case("invisible")
}

pub fn parse_pnml(bytes: &[u8], alphabet: &mut Alphabet) -> Result<SystemNet, PnmlError> {
    let mut reader = Reader::from_reader(bytes);
    let mut buf = Vec::new();
    let mut stack: Vec<Vec<u8>> = Vec::new();
    let mut places: Vec<RawNode> = Vec::new();
    let mut transitions: Vec<RawNode> = Vec::new();
    let mut arcs: Vec<(String, String, String)> = Vec::new();
    let mut finals: Vec<Vec<(String, u32)>> = Vec::new();
    let mut final_place: Option<String> = None;
    loop {
        let pos = reader.buffer_position();
        let ev = reader
            .read_event_into(&mut buf)
            .map_err(|e| PnmlError::Xml { line: line_of(bytes, pos), message: e.to_string() })?;
        match ev {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let name = e.local_name().as_ref().to_vec();
                let parent = stack.last().map(Vec::as_slice);
                match name.as_slice() {
                    b"place" if stack.iter().any(|s| s == b"finalmarkings") => {
                        final_place = attr(e, b"idref");
                    }
                    b"place" => places.push(RawNode { id: attr(e, b"id").unwrap_or_default(), ..RawNode::default() }),
                    b"transition" => {
                        transitions.push(RawNode { id: attr(e, b"id").unwrap_or_default(), ..RawNode::default() })
                    }
                    b"arc" => arcs.push((
                        attr(e, b"id").unwrap_or_default(),
                        attr(e, b"source").unwrap_or_default(),
                        attr(e, b"target").unwrap_or_default(),
                    )),
                    b"toolspecific" if parent == Some(b"transition") => {
                        let flagged = attr(e, b"activity").is_some_and(|v| v == "$invisible$")
                            || attr(e, b"invisible").is_some_and(|v| v == "true");
                        if let Some(t) = transitions.last_mut() {
                            t.invisible |= flagged;
                        }
                    }
                    b"marking" if stack.iter().any(|s| s == b"finalmarkings") => finals.push(Vec::new()),
                    _ => {}
                }
                if matches!(ev, Event::Start(_)) {
                    stack.push(name);
                }
            }
            Event::Text(ref t) => {
                let text =
                    t.unescape().map_err(|e| PnmlError::Xml { line: line_of(bytes, pos), message: e.to_string() })?;
                let text = text.trim().to_string();
                let path: Vec<&[u8]> = stack.iter().rev().take(3).map(Vec::as_slice).collect();
                match path.as_slice() {
                    [b"text", b"name", b"place", ..] => {
                        if let Some(p) = places.last_mut() {
                            p.name = Some(text);
                        }
                    }
                    [b"text", b"name", b"transition", ..] => {
                        if let Some(t) = transitions.last_mut() {
                            t.name = Some(text);
                        }
                    }
                    [b"text", b"initialMarking", b"place", ..] => {
                        let tokens = text.parse().unwrap_or(0);
                        if let Some(p) = places.last_mut() {
                            p.tokens = tokens;
                        }
                    }
                    [b"text", b"place", b"marking", ..] => {
                        if let (Some(m), Some(p)) = (finals.last_mut(), final_place.clone()) {
                            m.push((p, text.parse().unwrap_or(0)));
                        }
                    }
                    _ => {}
                }
            }
            Event::End(_) => {
                stack.pop();
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    assemble(places, transitions, arcs, finals, alphabet)
}

fn assemble(
    places: Vec<RawNode>,
    transitions: Vec<RawNode>,
    arcs: Vec<(String, String, String)>,
    finals: Vec<Vec<(String, u32)>>,
    alphabet: &mut Alphabet,
) -> Result<SystemNet, PnmlError> {
    let mut b = NetBuilder::new();
    let mut place_ids = HashMap::new();
    let mut initial = Vec::new();
    for p in &places {
        if p.tokens > 1 {
            return Err(PnmlError::NotSafe { place: p.id.clone(), tokens: p.tokens });
        }
        let id = b.place(p.name.as_deref().filter(|n| !n.is_empty()).unwrap_or(&p.id));
        if p.tokens == 1 {
            initial.push(id);
        }
        place_ids.insert(p.id.clone(), id);
    }
    let mut trans_ids = HashMap::new();
    for t in &transitions {
        let name = t.name.clone().unwrap_or_default();
        let label = if t.invisible || is_silent_name(&name) { LabelId::TAU } else { alphabet.intern(name.trim()) };
        let shown = if name.trim().is_empty() { t.id.as_str() } else { name.trim() };
        trans_ids.insert(t.id.clone(), b.transition(shown, label));
    }
    for (id, s, t) in &arcs {
        let unknown = |n: &String| PnmlError::UnknownNode { arc: id.clone(), node: n.clone() };
        match (place_ids.get(s), trans_ids.get(s), place_ids.get(t), trans_ids.get(t)) {
            (Some(&p), _, _, Some(&tr)) => {
                b.input(p, tr);
            }
            (_, Some(&tr), Some(&p), _) => {
                b.output(tr, p);
            }
            (None, None, _, _) => return Err(unknown(s)),
            (_, _, None, None) => return Err(unknown(t)),
            _ => return Err(PnmlError::BadArc { arc: id.clone() }),
        }
    }
    let n = b.num_places();
    let probe = b.clone().build(Marking::empty(n), Vec::new());
    let sources: Vec<u32> = (0..n as u32).filter(|&p| probe.place_preset(p).is_empty()).collect();
    let sinks: Vec<u32> = (0..n as u32).filter(|&p| probe.place_postset(p).is_empty()).collect();
    let initial = match (initial.is_empty(), sources.as_slice()) {
        (false, _) => Marking::from_places(n, &initial),
        (true, [i]) => Marking::from_places(n, &[*i]),
        _ => return Err(PnmlError::NoInitialMarking),
    };
    let mut final_markings = Vec::new();
    for m in &finals {
        let mut ps = Vec::new();
        for (p, tokens) in m {
            if *tokens > 1 {
                return Err(PnmlError::NotSafe { place: p.clone(), tokens: *tokens });
            }
            if *tokens == 1 {
                ps.push(
                    *place_ids
                        .get(p)
                        .ok_or_else(|| PnmlError::UnknownNode { arc: "finalmarkings".into(), node: p.clone() })?,
                );
            }
        }
        final_markings.push(Marking::from_places(n, &ps));
    }
    if final_markings.is_empty() {
        match sinks.as_slice() {
            [o] => final_markings.push(Marking::from_places(n, &[*o])),
            _ => return Err(PnmlError::NoFinalMarking),
        }
    }
    Ok(b.build(initial, final_markings))
}

pub fn read_pnml(path: &Path, alphabet: &mut Alphabet) -> Result<SystemNet, PnmlError> {
    let bytes = std::fs::read(path).map_err(|source| PnmlError::Io { path: path.display().to_string(), source })?;
    parse_pnml(&bytes, alphabet)
}

fn esc(s: &str) -> std::borrow::Cow<'_, str> {
    quick_xml::escape::escape(s)
}

pub fn write_pnml(net: &SystemNet, alphabet: &Alphabet) -> String {
    let mut s = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<pnml>\n");
    s.push_str(
        "  <net id=\"net\" type=\"http://www.pnml.org/version-2009/grammar/pnmlcoremodel\">\n    <page id=\"page\">\n",
    );
    for (i, p) in net.places().iter().enumerate() {
        let _ = write!(s, "      <place id=\"p{i}\"><name><text>{}</text></name>", esc(&p.name));
        if net.initial().contains(i as u32) {
            s.push_str("<initialMarking><text>1</text></initialMarking>");
        }
        s.push_str("</place>\n");
    }
    for (i, t) in net.transitions().iter().enumerate() {
        let _ = write!(s, "      <transition id=\"t{i}\"><name><text>");
        if t.label.is_tau() {
            let _ = write!(
                s,
                "{}</text></name><toolspecific tool=\"ProM\" version=\"6.4\" activity=\"$invisible$\"/>",
                esc(&t.name)
            );
        } else {
            let _ = write!(s, "{}</text></name>", esc(alphabet.name(t.label)));
        }
        s.push_str("</transition>\n");
    }
    let mut arc = 0;
    for t in 0..net.num_transitions() as u32 {
        for &p in net.preset(t) {
            let _ = writeln!(s, "      <arc id=\"a{arc}\" source=\"p{p}\" target=\"t{t}\"/>");
            arc += 1;
        }
        for &p in net.postset(t) {
            let _ = writeln!(s, "      <arc id=\"a{arc}\" source=\"t{t}\" target=\"p{p}\"/>");
            arc += 1;
        }
    }
    s.push_str("    </page>\n    <finalmarkings>\n");
    for m in net.finals() {
        s.push_str("      <marking>\n");
        for p in m.places() {
            let _ = writeln!(s, "        <place idref=\"p{p}\"><text>1</text></place>");
        }
        s.push_str("      </marking>\n");
    }
    s.push_str("    </finalmarkings>\n  </net>\n</pnml>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use pspalign_core::samples;

    #[test]
    fn running_example_round_trips() {
        let mut a = Alphabet::new();
        let net = samples::running_example(&mut a);
        let text = write_pnml(&net, &a);
        let mut b = a.clone();
        let back = parse_pnml(text.as_bytes(), &mut b).unwrap();
        assert_eq!(back.num_places(), 14);
        assert_eq!(back.num_transitions(), 12);
        assert_eq!(back.transitions().iter().filter(|t| t.label.is_tau()).count(), 3);
        assert_eq!(back.initial(), net.initial());
        assert_eq!(back.finals(), net.finals());
        for t in 0..net.num_transitions() as u32 {
            assert_eq!(back.preset(t), net.preset(t));
            assert_eq!(back.postset(t), net.postset(t));
            assert_eq!(back.transition(t).label, net.transition(t).label);
        }
    }

    #[test]
    fn defaults_to_source_and_sink() {
        let doc = r#"<pnml><net id="n"><page id="g">
            <place id="i"/><place id="o"/>
            <transition id="x"><name><text>A</text></name></transition>
            <transition id="y"><name><text>tau</text></name></transition>
            <transition id="z"/>
            <arc id="1" source="i" target="x"/><arc id="2" source="x" target="o"/>
            <arc id="3" source="i" target="y"/><arc id="4" source="y" target="o"/>
            <arc id="5" source="i" target="z"/><arc id="6" source="z" target="o"/>
        </page></net></pnml>"#;
        let mut a = Alphabet::new();
        let net = parse_pnml(doc.as_bytes(), &mut a).unwrap();
        assert_eq!(net.marking_names(net.initial()), ["i"]);
        assert_eq!(net.marking_names(&net.finals()[0]), ["o"]);
        let labels: Vec<_> = net.transitions().iter().map(|t| t.label).collect();
        assert_eq!(labels, [a.get("A").unwrap(), LabelId::TAU, LabelId::TAU]);
    }

    #[test]
    fn rejects_unsafe_and_dangling() {
        let doc = r#"<pnml><net><page><place id="i"><initialMarking><text>2</text></initialMarking></place></page></net></pnml>"#;
        assert!(matches!(parse_pnml(doc.as_bytes(), &mut Alphabet::new()), Err(PnmlError::NotSafe { tokens: 2, .. })));
        let doc = r#"<pnml><net><page><place id="i"/><arc id="a" source="i" target="nope"/></page></net></pnml>"#;
        assert!(matches!(parse_pnml(doc.as_bytes(), &mut Alphabet::new()), Err(PnmlError::UnknownNode { .. })));
    }
}
