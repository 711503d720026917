use std::fmt::Write as _;

const SYSTEM: &str = "\
You translate plans into NuSMV models.
Reply with a single fenced code block that contains exactly one `MODULE main`
model followed by one LTLSPEC line. Use only boolean and symbolic enum
variables, `init(..)` and `next(..)` assignments, and `case .. esac` blocks
whose last guard is TRUE. Use a variable `stage` to sequence the actions, make
each action's preconditions guards of its effects, and use a boolean `ok`
that becomes FALSE when an action runs without its preconditions. The
specification must state that the plan finishes with `ok` and the goal true.
Do not write anything outside the code block.";

const JUDGE_SYSTEM: &str = "\
You check whether plans are valid. A plan is valid when every action's
preconditions hold when it is executed and the goal holds after the last
action. Answer with exactly one word: VALID or INVALID.";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

/// A chat-style prompt. `problem_id` lets replay providers find the
/// matching transcript; it is not sent to remote providers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prompt {
    pub problem_id: Option<String>,
    pub messages: Vec<Message>,
}

impl Prompt {
    pub fn for_problem(mut self, problem_id: Option<&str>) -> Self {
        self.problem_id = problem_id.map(str::to_string);
        self
    }

    /// Stable text form, one section per message.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for m in &self.messages {
            let _ = writeln!(out, "=== {} ===", m.role.as_str());
            out.push_str(&m.content);
            if !m.content.is_empty() && !m.content.ends_with('\n') {
                out.push('\n');
            }
        }
        out
    }
}

/// A worked example: plan text and its model with specification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exemplar {
    pub plan_text: String,
    pub model_text: String,
}

/// The bundled three-action example.
pub fn default_exemplar() -> Exemplar {
    Exemplar {
        plan_text: include_str!("../../assets/exemplar_plan.txt").to_string(),
        model_text: include_str!("../../assets/exemplar_model.smv").to_string(),
    }
}

fn fenced(text: &str) -> String {
    let body = text.trim_end_matches('\n');
    format!("```smv\n{body}\n```\n")
}

/// One-shot translation prompt: instructions, the exemplar as a user and
/// assistant turn, then the plan to translate.
pub fn build_prompt(nl_plan: &str, exemplar: &Exemplar) -> Prompt {
    let msg = |role, content: String| Message { role, content };
    Prompt {
        problem_id: None,
        messages: vec![
            msg(Role::System, SYSTEM.to_string()),
            msg(Role::User, exemplar.plan_text.clone()),
            msg(Role::Assistant, fenced(&exemplar.model_text)),
            msg(Role::User, nl_plan.to_string()),
        ],
    }
}

/// Prompt asking the model to judge validity directly.
pub fn build_judgment_prompt(nl_plan: &str) -> Prompt {
    Prompt {
        problem_id: None,
        messages: vec![
            Message {
                role: Role::System,
                content: JUDGE_SYSTEM.to_string(),
            },
            Message {
                role: Role::User,
                content: nl_plan.to_string(),
            },
        ],
    }
}
