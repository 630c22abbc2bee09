//! Reader for TED-style XML transcripts:
//!
//! ```xml
//! <talks>
//!   <talk id="2183">
//!     <seg id="1">First sentence.</seg>
//!     <seg id="2">Second sentence.</seg>
//!   </talk>
//! </talks>
//! ```
//!
//! The IWSLT release spelling `<doc docid="...">` is accepted as well. Other
//! elements inside a talk (titles, urls, ...) are skipped; markup inside a
//! `<seg>`, a `<seg>` outside a talk and nested talks are errors.

use std::io::BufRead;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{Document, Sentence, TokenizationProfile};
use crate::error::{Error, Result};

/// A talk that was skipped, with the byte offset of its start tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub offset: u64,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TedIngest {
    pub documents: Vec<Document>,
    pub rejected: Vec<Diagnostic>,
}

/// `None` when the tag is not a talk, `Some(None)` for a talk without id.
fn talk_id(tag: &BytesStart<'_>) -> Result<Option<Option<String>>> {
    let wanted: &[u8] = match tag.name().as_ref() {
        b"talk" => b"id",
        b"doc" => b"docid",
        _ => return Ok(None),
    };
    for attr in tag.attributes() {
        let attr = attr.map_err(|e| Error::Xml {
            offset: 0,
            message: e.to_string(),
        })?;
        if attr.key.as_ref() == wanted {
            let value = attr
                .unescape_value()
                .map_err(|e| Error::Xml {
                    offset: 0,
                    message: e.to_string(),
                })?
                .trim()
                .to_string();
            return Ok(Some((!value.is_empty()).then_some(value)));
        }
    }
    Ok(Some(None))
}

struct OpenTalk {
    id: Option<String>,
    offset: u64,
    sentences: Vec<Sentence>,
}

pub fn ingest_ted_xml<R: BufRead>(input: R, profile: TokenizationProfile) -> Result<TedIngest> {
    let mut reader = Reader::from_reader(input);
    let mut buf = Vec::new();
    let mut out = TedIngest::default();
    let mut depth = 0usize;
    let mut talk: Option<OpenTalk> = None;
    let mut seg: Option<String> = None;

    let xml_err = |offset: u64, message: String| Error::Xml { offset, message };

    loop {
        let offset = reader.buffer_position();
        let event = reader
            .read_event_into(&mut buf)
            .map_err(|e| xml_err(reader.error_position(), e.to_string()))?;
        match event {
            Event::Start(tag) => {
                if seg.is_some() {
                    return Err(xml_err(offset, "markup inside <seg>".into()));
                }
                depth += 1;
                if let Some(id) = talk_id(&tag).map_err(|e| relocate(e, offset))? {
                    if talk.is_some() {
                        return Err(xml_err(offset, "nested talk element".into()));
                    }
                    talk = Some(OpenTalk {
                        id,
                        offset,
                        sentences: Vec::new(),
                    });
                } else if tag.name().as_ref() == b"seg" {
                    if talk.is_none() {
                        return Err(xml_err(offset, "<seg> outside of a talk".into()));
                    }
                    seg = Some(String::new());
                }
            }
            Event::Empty(tag) => {
                if seg.is_some() {
                    return Err(xml_err(offset, "markup inside <seg>".into()));
                }
                if let Some(id) = talk_id(&tag).map_err(|e| relocate(e, offset))? {
                    if talk.is_some() {
                        return Err(xml_err(offset, "nested talk element".into()));
                    }
                    finish_talk(
                        &mut out,
                        OpenTalk {
                            id,
                            offset,
                            sentences: Vec::new(),
                        },
                    );
                } else if tag.name().as_ref() == b"seg" {
                    match talk.as_mut() {
                        Some(t) => t.sentences.push(Sentence::new("", profile)),
                        None => return Err(xml_err(offset, "<seg> outside of a talk".into())),
                    }
                }
            }
            Event::End(tag) => {
                depth = depth.saturating_sub(1);
                if tag.name().as_ref() == b"seg" {
                    if let (Some(text), Some(t)) = (seg.take(), talk.as_mut()) {
                        t.sentences.push(Sentence::new(text.trim(), profile));
                    }
                } else if matches!(tag.name().as_ref(), b"talk" | b"doc") {
                    if let Some(t) = talk.take() {
                        finish_talk(&mut out, t);
                    }
                }
            }
            Event::Text(text) => {
                if let Some(s) = seg.as_mut() {
                    let t = text.unescape().map_err(|e| xml_err(offset, e.to_string()))?;
                    s.push_str(&t);
                }
            }
            Event::CData(data) => {
                if let Some(s) = seg.as_mut() {
                    s.push_str(&String::from_utf8_lossy(&data));
                }
            }
            Event::Eof => {
                if depth > 0 || talk.is_some() || seg.is_some() {
                    return Err(xml_err(offset, "unexpected end of input (unclosed element)".into()));
                }
                break;
            }
            _ => {}
        }
        buf.clear();
    }
    Ok(out)
}

fn relocate(err: Error, offset: u64) -> Error {
    match err {
        Error::Xml { message, .. } => Error::Xml { offset, message },
        other => other,
    }
}

fn finish_talk(out: &mut TedIngest, talk: OpenTalk) {
    match talk.id {
        Some(id) => out.documents.push(Document::new(id, talk.sentences)),
        None => out.rejected.push(Diagnostic {
            offset: talk.offset,
            message: format!(
                "talk at byte {} has no id attribute; {} segments skipped",
                talk.offset,
                talk.sentences.len()
            ),
        }),
    }
}
