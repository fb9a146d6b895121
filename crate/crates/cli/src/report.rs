use std::fmt::Display;

/// Ordered fields printed either as aligned text or as `key=value` lines.
#[derive(Debug, Default)]
pub struct Report {
    fields: Vec<(&'static str, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn field(&mut self, key: &'static str, value: impl Display) -> &mut Self {
        self.fields.push((key, value.to_string()));
        self
    }

    pub fn render(&self, kv: bool) -> String {
        let mut out = String::new();
        if kv {
            for (k, v) in &self.fields {
                out.push_str(&format!("{k}={v}\n"));
            }
        } else {
            let width = self.fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in &self.fields {
                let label = k.replace('_', " ");
                out.push_str(&format!("{label:<width$}  {v}\n"));
            }
        }
        out
    }

    pub fn print(&self, kv: bool) {
        print!("{}", self.render(kv));
    }
}
