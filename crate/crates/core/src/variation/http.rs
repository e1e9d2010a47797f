use ureq::Agent;

use super::llm::{ChatClient, ChatRequest, LlmEndpointConfig, SecretString, TransportError};

/// Blocking client for OpenAI-compatible `/chat/completions` endpoints.
pub struct HttpChatClient {
    agent: Agent,
    url: String,
    api_key: SecretString,
}

impl HttpChatClient {
    pub fn new(config: &LlmEndpointConfig) -> Self {
        let agent: Agent = Agent::config_builder()
            .timeout_global(Some(config.timeout()))
            .http_status_as_error(false)
            .build()
            .into();
        let url = format!("{}/chat/completions", config.base_url.trim_end_matches('/'));
        Self {
            agent,
            url,
            api_key: config.api_key.clone(),
        }
    }
}

impl ChatClient for HttpChatClient {
    fn complete(&self, request: &ChatRequest) -> Result<String, TransportError> {
        let mut resp = self
            .agent
            .post(&self.url)
            .header("Authorization", &format!("Bearer {}", self.api_key.expose()))
            .send_json(request)
            .map_err(|e| TransportError::Request(e.to_string()))?;
        let status = resp.status().as_u16();
        if status != 200 {
            let body = resp.body_mut().read_to_string().unwrap_or_default();
            return Err(TransportError::Status { status, body });
        }
        let value: serde_json::Value = resp
            .body_mut()
            .read_json()
            .map_err(|e| TransportError::Malformed(e.to_string()))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| TransportError::Malformed("no choices[0].message.content".into()))
    }
}
