import { describe, expect, it } from 'vitest';

import { ServiceClient, ServiceError } from '../src/api.js';

function fakeFetch(status: number, body: unknown) {
  const calls: Array<{ url: string; init?: RequestInit }> = [];
  const impl = async (url: string, init?: RequestInit) => {
    calls.push({ url, init });
    return new Response(JSON.stringify(body), {
      status,
      headers: { 'Content-Type': 'application/json' },
    });
  };
  return { impl, calls };
}

const CONFIG = {
  goal_amount: 100,
  organizer_male: false,
  has_beneficiary: false,
  city: 'Austin',
  state: 'TX',
};

describe('ServiceClient', () => {
  it('posts the draft fields the service expects', async () => {
    const { impl, calls } = fakeFetch(200, {
      predicted_probability: 0.5,
      checklist: {},
      top_feature_contributions: [],
      lexical: {},
    });
    const client = new ServiceClient('http://svc', impl);
    await client.score('my text', CONFIG);
    expect(calls[0].url).toBe('http://svc/score');
    const sent = JSON.parse(String(calls[0].init?.body));
    expect(sent.description).toBe('my text');
    expect(sent.goal_amount).toBe(100);
  });

  it('raises a typed error from the envelope', async () => {
    const { impl } = fakeFetch(502, {
      code: 'provider_failure',
      message: 'provider unreachable',
      detail: { retry_after_seconds: 30 },
    });
    const client = new ServiceClient('http://svc', impl);
    const err = await client.augment('text', CONFIG).catch((e) => e);
    expect(err).toBeInstanceOf(ServiceError);
    expect(err.status).toBe(502);
    expect(err.envelope.code).toBe('provider_failure');
  });

  it('parses healthz', async () => {
    const { impl } = fakeFetch(200, { status: 'ok', model_loaded: true });
    const client = new ServiceClient('http://svc', impl);
    expect((await client.healthz()).status).toBe('ok');
  });
});
