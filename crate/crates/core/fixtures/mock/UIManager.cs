using UnityEngine;
using UnityEngine.UI;

// __CLASS__ updates the HUD and toggles menus.
__NOTES__
public class __CLASS__ : MonoBehaviour
{
    [SerializeField] private Text scoreLabel;
    [SerializeField] private Text livesLabel;
    [SerializeField] private GameObject pauseMenu;

    private void Start()
    {
        if (pauseMenu != null)
        {
            pauseMenu.SetActive(false);
        }
    }

    private void Update()
    {
        if (GameManager.Instance == null)
        {
            return;
        }
        SetScore(GameManager.Instance.Score);
        SetLives(GameManager.Instance.Lives);
    }

    public void SetScore(int score)
    {
        if (scoreLabel != null)
        {
            scoreLabel.text = $"Score: {score}";
        }
    }

    public void SetLives(int lives)
    {
        if (livesLabel != null)
        {
            livesLabel.text = $"Lives: {lives}";
        }
    }

    public void ShowPauseMenu(bool visible)
    {
        if (pauseMenu != null)
        {
            pauseMenu.SetActive(visible);
        }
    }
}
