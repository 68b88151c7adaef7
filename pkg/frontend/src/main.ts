import { createClient } from './api.js';
import { createApp } from './app.js';

const root = document.querySelector<HTMLDivElement>('#app');
if (root) {
  void createApp(root, createClient((path, init) => fetch(path, init))).catch((err: unknown) => {
    root.textContent = `failed to start: ${String(err)}`;
  });
}
