use serde::{Deserialize, Serialize};

/// The fixed instrument delivered with every survey. Loaded from a config
/// document so studies can swap question sets without code changes.
pub const DEFAULT_INSTRUMENT_TOML: &str = r#"
[[questions]]
id = "mood"
prompt = "How would you rate your mood right now?"
answer = { type = "scale", min = 1, max = 5 }

[[questions]]
id = "stress"
prompt = "How stressed do you feel right now?"
answer = { type = "scale", min = 1, max = 5 }

[[questions]]
id = "location"
prompt = "Where are you right now?"
answer = { type = "choice", options = ["home", "work", "transit", "outdoors", "other"] }

[[questions]]
id = "alone"
prompt = "Are you alone right now?"
answer = { type = "boolean" }

[[questions]]
id = "activity_note"
prompt = "Briefly describe what you are doing."
answer = { type = "text" }
"#;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AnswerType {
    Scale { min: i64, max: i64 },
    Boolean,
    Text,
    Choice { options: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub prompt: String,
    pub answer: AnswerType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyDefinition {
    pub questions: Vec<Question>,
}

impl SurveyDefinition {
    pub fn default_instrument() -> Self {
        Self::from_toml_str(DEFAULT_INSTRUMENT_TOML).expect("built-in instrument parses")
    }

    pub fn from_toml_str(text: &str) -> Result<Self, String> {
        let def: SurveyDefinition = toml::from_str(text).map_err(|e| e.to_string())?;
        if def.questions.is_empty() {
            return Err("a survey definition needs at least one question".into());
        }
        let mut seen = std::collections::BTreeSet::new();
        for q in &def.questions {
            if !seen.insert(&q.id) {
                return Err(format!("duplicate question id `{}`", q.id));
            }
        }
        Ok(def)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_instrument_has_five_questions() {
        let def = SurveyDefinition::default_instrument();
        assert_eq!(def.questions.len(), 5);
        assert_eq!(def.questions[0].id, "mood");
        assert!(matches!(
            def.questions[2].answer,
            AnswerType::Choice { ref options } if options.len() == 5
        ));
    }

    #[test]
    fn duplicate_question_ids_are_rejected() {
        let bad = r#"
[[questions]]
id = "a"
prompt = "one"
answer = { type = "boolean" }

[[questions]]
id = "a"
prompt = "two"
answer = { type = "text" }
"#;
        assert!(SurveyDefinition::from_toml_str(bad).is_err());
    }
}
