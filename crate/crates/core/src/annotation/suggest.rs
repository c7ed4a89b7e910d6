//! Keyword-based span suggestions.

use serde::{Deserialize, Serialize};

use super::{field_spec, AnnotationError, AnnotationTask, FieldKey, PolicyText};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Suggestion {
    pub field: FieldKey,
    pub span_start: usize,
    pub span_end: usize,
    pub confidence: f64,
    pub method: String,
}

/// Sentence spans as `[start, end)` character offsets. A sentence ends after
/// `.`, `!`, `?` or a newline that is followed by whitespace, an uppercase
/// letter or the end of the text. Surrounding whitespace is trimmed.
pub fn sentences(text: &str) -> Vec<(usize, usize)> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut start = 0;
    let push = |from: usize, to: usize, out: &mut Vec<(usize, usize)>| {
        let mut s = from;
        let mut e = to;
        while s < e && chars[s].is_whitespace() {
            s += 1;
        }
        while e > s && chars[e - 1].is_whitespace() {
            e -= 1;
        }
        if s < e {
            out.push((s, e));
        }
    };
    for i in 0..chars.len() {
        if matches!(chars[i], '.' | '!' | '?' | '\n') {
            let boundary = chars.get(i + 1).is_none_or(|n| n.is_whitespace() || n.is_uppercase());
            if boundary {
                push(start, i + 1, &mut out);
                start = i + 1;
            }
        }
    }
    push(start, chars.len(), &mut out);
    out
}

fn words(sentence: &str) -> impl Iterator<Item = String> + '_ {
    sentence
        .split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|w| !w.is_empty())
}

/// Suggests every sentence containing a keyword of `field`. Confidence is
/// the number of keyword-matching words over the sentence's word count.
pub fn suggest(task: &AnnotationTask, policy: &PolicyText, field: FieldKey) -> Result<Vec<Suggestion>, AnnotationError> {
    if !task.question_queue.contains(&field) {
        return Err(AnnotationError::UnknownField(field.to_string()));
    }
    let keywords = &field_spec(field).keywords;
    let mut out = Vec::new();
    for (start, end) in sentences(&policy.body) {
        let sentence = policy.excerpt(start, end);
        let (mut total, mut hits) = (0usize, 0usize);
        for w in words(&sentence) {
            total += 1;
            if keywords.iter().any(|k| w.starts_with(k.as_str())) {
                hits += 1;
            }
        }
        if hits > 0 {
            out.push(Suggestion {
                field,
                span_start: start,
                span_end: end,
                confidence: (hits as f64 / total as f64).clamp(0.0, 1.0),
                method: "keyword".to_string(),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::create_task;

    #[test]
    fn sentence_boundaries() {
        let text = "Erster Satz. Zweiter Satz!Dritter\nVierter?  ";
        let spans = sentences(text);
        let got: Vec<String> = spans.iter().map(|&(s, e)| text.chars().skip(s).take(e - s).collect()).collect();
        assert_eq!(got, ["Erster Satz.", "Zweiter Satz!", "Dritter", "Vierter?"]);
        // no split inside numbers or before lowercase
        assert_eq!(sentences("Version 1.2 gilt.ab jetzt").len(), 1);
    }

    #[test]
    fn controller_sentence_is_suggested() {
        let body = "Willkommen. Der Verantwortliche ist ACME GmbH. Sonst nichts.";
        let policy = PolicyText::new("p", None, body).unwrap();
        let task = create_task("t", &policy).unwrap();
        let s = suggest(&task, &policy, FieldKey::ControllerIdentity).unwrap();
        assert_eq!(s.len(), 1);
        // "Der Verantwortliche ist ACME GmbH." spans chars 12..46, 1 of 5 words matches
        assert_eq!((s[0].span_start, s[0].span_end), (12, 46));
        assert_eq!(policy.excerpt(12, 46), "Der Verantwortliche ist ACME GmbH.");
        assert_eq!(s[0].confidence, 0.2);
        assert_eq!(s[0].method, "keyword");
    }

    #[test]
    fn no_hits_no_suggestions() {
        let policy = PolicyText::new("p", None, "Hallo Welt.").unwrap();
        let task = create_task("t", &policy).unwrap();
        assert!(suggest(&task, &policy, FieldKey::Adm).unwrap().is_empty());
    }

    #[test]
    fn field_outside_queue() {
        let policy = PolicyText::new("p", None, "Hallo Welt.").unwrap();
        let mut task = create_task("t", &policy).unwrap();
        task.question_queue.retain(|&k| k != FieldKey::Adm);
        assert_eq!(suggest(&task, &policy, FieldKey::Adm), Err(AnnotationError::UnknownField("adm".into())));
    }
}
