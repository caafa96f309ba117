import { ApiClient } from "./api.js";
import { App } from "./app.js";

const app = new App(document, new ApiClient("", "browser-analyst"));
void app.init();

declare global {
  interface Window {
    darkwatchApp: App;
  }
}
window.darkwatchApp = app;
