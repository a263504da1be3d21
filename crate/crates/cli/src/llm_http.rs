//! Minimal HTTP client for LLM-guided rule generation. Network calls
//! are pluggable and never exercised by the test suite.
//!
//! Contract: POST to `INDUCT_LLM_ENDPOINT` with `{"prompt": "..."}`,
//! bearer-authenticated by `INDUCT_LLM_API_KEY` when set; the reply is
//! `{"completion": "..."}`.

use induct_core::rulegen::LlmClient;
use serde::Deserialize;

pub struct HttpLlmClient {
    endpoint: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

#[derive(Deserialize)]
struct CompletionReply {
    completion: String,
}

impl HttpLlmClient {
    pub fn from_env() -> anyhow::Result<HttpLlmClient> {
        let endpoint = std::env::var("INDUCT_LLM_ENDPOINT")
            .map_err(|_| anyhow::anyhow!("INDUCT_LLM_ENDPOINT not set"))?;
        Ok(HttpLlmClient {
            endpoint,
            api_key: std::env::var("INDUCT_LLM_API_KEY").ok(),
            client: reqwest::blocking::Client::builder()
                .timeout(std::time::Duration::from_secs(120))
                .build()?,
        })
    }
}

impl LlmClient for HttpLlmClient {
    fn complete(&self, prompt: &str) -> Result<String, String> {
        let mut request = self
            .client
            .post(&self.endpoint)
            .json(&serde_json::json!({ "prompt": prompt }));
        if let Some(key) = &self.api_key {
            request = request.bearer_auth(key);
        }
        let reply: CompletionReply = request
            .send()
            .map_err(|e| e.to_string())?
            .error_for_status()
            .map_err(|e| e.to_string())?
            .json()
            .map_err(|e| e.to_string())?;
        Ok(reply.completion)
    }
}
