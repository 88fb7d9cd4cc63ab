using UnityEngine;
using UnityEngine.UI;

public partial class Hud : MonoBehaviour
{
    [SerializeField] private Slider healthBar;
    [SerializeField] private Text scoreLabel;

    public void SetHealth(int current, int max)
    {
        healthBar.value = max == 0 ? 0f : (float)current / max;
    }

    public void SetScore(int score)
    {
        scoreLabel.text = $"{score:D6}";
    }
}

public partial class Hud
{
    private void OnEnable()
    {
        SetScore(0);
    }
}
